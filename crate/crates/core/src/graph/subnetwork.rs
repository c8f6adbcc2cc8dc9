use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::netmodel::{Network, Zones};

/// One inter-zone candidate line as an edge between zones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ZoneEdge {
    pub line: usize,
    /// Zone of the line's `from_bus`.
    pub from_zone: usize,
    pub to_zone: usize,
}

/// Zones as nodes, inter-zone candidates as (possibly parallel) edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubnetworkGraph {
    pub n_zones: usize,
    pub edges: Vec<ZoneEdge>,
}

impl SubnetworkGraph {
    pub fn new(net: &Network, zones: &Zones) -> SubnetworkGraph {
        let edges = net
            .candidate_lines()
            .filter_map(|k| {
                let (a, b) = net.ends(k);
                let (za, zb) = (zones.zone_of[a], zones.zone_of[b]);
                (za != zb).then_some(ZoneEdge {
                    line: k,
                    from_zone: za,
                    to_zone: zb,
                })
            })
            .collect();
        SubnetworkGraph {
            n_zones: zones.len(),
            edges,
        }
    }

    /// Parallel edges grouped by unordered zone pair `(low, high)`; line
    /// lists keep edge order.
    pub fn merged(&self) -> BTreeMap<(usize, usize), Vec<usize>> {
        let mut m: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for e in &self.edges {
            let key = (e.from_zone.min(e.to_zone), e.from_zone.max(e.to_zone));
            m.entry(key).or_default().push(e.line);
        }
        m
    }

    /// Neighbour lists of the merged simple graph, ascending.
    pub fn simple_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_zones];
        for &(a, b) in self.merged().keys() {
            adj[a].push(b);
            adj[b].push(a);
        }
        for l in &mut adj {
            l.sort_unstable();
        }
        adj
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlackStrategy {
    /// Root each tree at a zone of minimum eccentricity.
    BreadthFirstCentral,
    /// Root each tree at a zone of maximum eccentricity.
    DepthFirst,
    /// Use the given zones as roots where they apply; other trees fall back
    /// to the central choice.
    Explicit(Vec<usize>),
}

/// A zone whose reference angle is relaxed by the candidates linking it to
/// its upstream zone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlanEntry {
    pub zone: usize,
    pub upstream: usize,
    /// Candidate line positions, ascending by line id.
    pub relaxing: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlackRelaxationPlan {
    pub roots: Vec<usize>,
    /// Non-root zones in breadth-first order from their roots.
    pub entries: Vec<PlanEntry>,
}

impl SlackRelaxationPlan {
    pub fn entry(&self, zone: usize) -> Option<&PlanEntry> {
        self.entries.iter().find(|e| e.zone == zone)
    }

    pub fn is_root(&self, zone: usize) -> bool {
        self.roots.contains(&zone)
    }
}

/// The merged zone graph is not a forest; each inner list is one
/// fundamental zone cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NotAForest {
    pub zone_cycles: Vec<Vec<usize>>,
}

impl std::fmt::Display for NotAForest {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "subnetwork graph is not a forest; zone cycles:")?;
        for c in &self.zone_cycles {
            let s: Vec<String> = c.iter().map(|z| z.to_string()).collect();
            write!(f, " [{}]", s.join(" "))?;
        }
        Ok(())
    }
}

impl std::error::Error for NotAForest {}

fn bfs_depths(adj: &[Vec<usize>], root: usize) -> Vec<Option<usize>> {
    let mut d = vec![None; adj.len()];
    d[root] = Some(0);
    let mut q = VecDeque::from([root]);
    while let Some(u) = q.pop_front() {
        for &v in &adj[u] {
            if d[v].is_none() {
                d[v] = Some(d[u].unwrap() + 1);
                q.push_back(v);
            }
        }
    }
    d
}

pub fn slack_relaxation_plan(
    gs: &SubnetworkGraph,
    net: &Network,
    strategy: &SlackStrategy,
) -> Result<SlackRelaxationPlan, NotAForest> {
    let adj = gs.simple_adjacency();
    let merged = gs.merged();
    let n = gs.n_zones;

    // forest check with fundamental cycles on failure
    let mut seen = vec![false; n];
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut depth = vec![0usize; n];
    let mut cycles = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some(u);
                    depth[v] = depth[u] + 1;
                    q.push_back(v);
                } else if parent[u] != Some(v) && u < v && parent[v] != Some(u) {
                    cycles.push(tree_cycle(&parent, &depth, u, v));
                }
            }
        }
    }
    if !cycles.is_empty() {
        return Err(NotAForest { zone_cycles: cycles });
    }

    // components, then a root per component
    let mut comp = vec![usize::MAX; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let d = bfs_depths(&adj, s);
        let members: Vec<usize> = (0..n).filter(|&z| d[z].is_some()).collect();
        for &z in &members {
            comp[z] = comps.len();
        }
        comps.push(members);
    }
    let mut roots = Vec::new();
    for members in &comps {
        let ecc = |z: usize| bfs_depths(&adj, z).into_iter().flatten().max().unwrap_or(0);
        let central = || *members.iter().min_by_key(|&&z| (ecc(z), z)).unwrap();
        let root = match strategy {
            SlackStrategy::BreadthFirstCentral => central(),
            SlackStrategy::DepthFirst => *members
                .iter()
                .min_by_key(|&&z| (std::cmp::Reverse(ecc(z)), z))
                .unwrap(),
            SlackStrategy::Explicit(list) => list
                .iter()
                .copied()
                .find(|z| members.contains(z))
                .unwrap_or_else(central),
        };
        roots.push(root);
    }

    let mut entries = Vec::new();
    for &root in &roots {
        let mut visited = vec![false; n];
        visited[root] = true;
        let mut q = VecDeque::from([root]);
        while let Some(u) = q.pop_front() {
            for &v in &adj[u] {
                if visited[v] {
                    continue;
                }
                visited[v] = true;
                let mut relaxing = merged[&(u.min(v), u.max(v))].clone();
                relaxing.sort_by(|&a, &b| net.line(a).id.cmp(&net.line(b).id));
                entries.push(PlanEntry {
                    zone: v,
                    upstream: u,
                    relaxing,
                });
                q.push_back(v);
            }
        }
    }
    Ok(SlackRelaxationPlan { roots, entries })
}

fn tree_cycle(parent: &[Option<usize>], depth: &[usize], u: usize, v: usize) -> Vec<usize> {
    let (mut a, mut b) = (u, v);
    let mut left = vec![a];
    let mut right = vec![b];
    while a != b {
        if depth[a] >= depth[b] {
            a = parent[a].unwrap();
            left.push(a);
        } else {
            b = parent[b].unwrap();
            right.push(b);
        }
    }
    right.pop();
    left.extend(right.into_iter().rev());
    left
}
