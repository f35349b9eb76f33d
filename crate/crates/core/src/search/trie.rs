use std::sync::Arc;

use crate::election::{BallotSignature, CandidateId, CandidateSet};

/// Bound ballots merged into a prefix tree so that a round's tally only has to
/// descend below eliminated candidates.
#[derive(Clone, Debug)]
pub(crate) struct BallotTrie {
    nodes: Vec<Node>,
    roots: Vec<u32>,
    total: u64,
}

#[derive(Clone, Debug)]
struct Node {
    candidate: CandidateId,
    /// Ballots whose ranking passes through this node.
    weight: u64,
    /// Ballots whose ranking ends at this node.
    ends: u64,
    children: Vec<u32>,
}

impl BallotTrie {
    pub fn build<'a>(ballots: impl IntoIterator<Item = &'a BallotSignature>) -> Self {
        let mut trie = BallotTrie { nodes: Vec::new(), roots: Vec::new(), total: 0 };
        for b in ballots {
            trie.insert(b.rankings());
        }
        trie
    }

    fn insert(&mut self, rankings: &[CandidateId]) {
        if rankings.is_empty() {
            return;
        }
        self.total += 1;
        let mut parent: Option<u32> = None;
        for (depth, &c) in rankings.iter().enumerate() {
            let siblings = match parent {
                None => &self.roots,
                Some(p) => &self.nodes[p as usize].children,
            };
            let found = siblings.iter().copied().find(|&i| self.nodes[i as usize].candidate == c);
            let idx = match found {
                Some(i) => i,
                None => {
                    let i = self.nodes.len() as u32;
                    self.nodes.push(Node { candidate: c, weight: 0, ends: 0, children: Vec::new() });
                    match parent {
                        None => self.roots.push(i),
                        Some(p) => self.nodes[p as usize].children.push(i),
                    }
                    i
                }
            };
            let node = &mut self.nodes[idx as usize];
            node.weight += 1;
            if depth + 1 == rankings.len() {
                node.ends += 1;
            }
            parent = Some(idx);
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Adds each ballot to its highest-ranked active candidate. Returns the
    /// number of exhausted ballots.
    pub fn tally_into(&self, active: CandidateSet, tallies: &mut [u64]) -> u64 {
        let mut exhausted = 0;
        let mut stack: Vec<u32> = self.roots.clone();
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i as usize];
            if active.contains(node.candidate) {
                tallies[node.candidate.index()] += node.weight;
            } else {
                exhausted += node.ends;
                stack.extend_from_slice(&node.children);
            }
        }
        exhausted
    }
}

/// Trie nodes at which bound ballots currently count, grouped by the active
/// candidate they count for, with the resulting tallies.
///
/// The node lists are shared between a search state and its children until
/// one of them changes them. Once three or fewer candidates remain the lists
/// are left as they are and later eliminations walk them read-only, skipping
/// ballots already counted elsewhere. Tallies are dropped once one candidate
/// remains, since the search reads nothing past that point; they are
/// recomputed on request.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Frontier {
    lists: Arc<Vec<Vec<u32>>>,
    /// Eliminated since the lists were last updated.
    pending: CandidateSet,
    tallies: Vec<u64>,
    exhausted: u64,
    stale: bool,
}

impl BallotTrie {
    /// Frontier with every candidate active.
    pub fn frontier(&self, n: usize) -> Frontier {
        let mut lists = vec![Vec::new(); n];
        let mut tallies = vec![0; n];
        for &i in &self.roots {
            let node = &self.nodes[i as usize];
            lists[node.candidate.index()].push(i);
            tallies[node.candidate.index()] += node.weight;
        }
        Frontier { lists: Arc::new(lists), pending: CandidateSet::empty(), tallies, exhausted: 0, stale: false }
    }

    /// Moves the ballots counting for `e` to their next choice in `active`,
    /// which must no longer contain `e`.
    pub fn eliminate(&self, f: &mut Frontier, e: CandidateId, active: CandidateSet) {
        if f.stale || active.len() <= 1 {
            f.stale = true;
            return;
        }
        f.tallies[e.index()] = 0;
        if active.len() <= 2 || !f.pending.is_empty() {
            self.eliminate_in_place(f, e, active);
            return;
        }
        let lists = Arc::make_mut(&mut f.lists);
        let mut stack = std::mem::take(&mut lists[e.index()]);
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i as usize];
            f.exhausted += node.ends;
            for &j in &node.children {
                let child = &self.nodes[j as usize];
                if active.contains(child.candidate) {
                    lists[child.candidate.index()].push(j);
                    f.tallies[child.candidate.index()] += child.weight;
                } else {
                    stack.push(j);
                }
            }
        }
    }

    /// Updates tallies only. Ballots reached through the lists of pending
    /// candidates are followed until they meet an active candidate or `e`;
    /// only those meeting `e` first move.
    fn eliminate_in_place(&self, f: &mut Frontier, e: CandidateId, active: CandidateSet) {
        let mut stack: Vec<(u32, bool)> = Vec::new();
        for x in f.pending.iter().chain(std::iter::once(e)) {
            stack.extend(f.lists[x.index()].iter().map(|&i| (i, false)));
            while let Some((i, moving)) = stack.pop() {
                let node = &self.nodes[i as usize];
                let moving = moving || node.candidate == e;
                if moving {
                    f.exhausted += node.ends;
                }
                for &j in &node.children {
                    let c = self.nodes[j as usize].candidate;
                    if active.contains(c) {
                        if moving {
                            f.tallies[c.index()] += self.nodes[j as usize].weight;
                        }
                    } else {
                        stack.push((j, moving));
                    }
                }
            }
        }
        f.pending.insert(e);
    }

    /// Bound-ballot tallies under `active`, which must be the frontier's
    /// active set, and the number exhausted.
    pub fn frontier_tallies(&self, f: &Frontier, active: CandidateSet) -> (Vec<u64>, u64) {
        if f.stale {
            let mut tallies = vec![0; f.tallies.len()];
            let exhausted = self.tally_into(active, &mut tallies);
            (tallies, exhausted)
        } else {
            (f.tallies.clone(), f.exhausted)
        }
    }
}
