use std::collections::VecDeque;

use super::paths::Adjacency;
use super::CycleSpec;
use crate::netmodel::{Network, Zones};

/// Fundamental cycles of a breadth-first spanning forest of the existing
/// lines, rooted at each zone's slack bus. Ids are `b0`, `b1`, ...
pub fn cycle_basis(net: &Network, zones: &Zones) -> Vec<CycleSpec> {
    let existing = |k: usize| !net.line(k).is_candidate();
    let adj = Adjacency::new(net, existing);
    let n = net.n_buses();
    // parent line and sign of the step parent -> child
    let mut parent: Vec<Option<(usize, usize, i8)>> = vec![None; n];
    let mut depth = vec![usize::MAX; n];
    let mut tree_line = vec![false; net.lines().len()];
    for z in &zones.zones {
        let root = z.slack;
        depth[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &(k, v, s) in &adj.adj[u] {
                if depth[v] == usize::MAX {
                    depth[v] = depth[u] + 1;
                    parent[v] = Some((u, k, s));
                    tree_line[k] = true;
                    queue.push_back(v);
                }
            }
        }
    }

    let mut out = Vec::new();
    let mut non_tree: Vec<usize> = net.existing_lines().filter(|&k| !tree_line[k]).collect();
    non_tree.sort_by(|&a, &b| net.line(a).id.cmp(&net.line(b).id));
    for k in non_tree {
        let (a, b) = net.ends(k);
        // a -k-> b, then b up to the common ancestor and back down to a
        let mut entries = vec![(k, 1i8)];
        let (mut u, mut v) = (b, a);
        let mut down: Vec<(usize, i8)> = Vec::new();
        while u != v {
            if depth[u] >= depth[v] {
                let (p, line, s) = parent[u].unwrap();
                entries.push((line, -s));
                u = p;
            } else {
                let (p, line, s) = parent[v].unwrap();
                down.push((line, s));
                v = p;
            }
        }
        entries.extend(down.into_iter().rev());
        out.push(CycleSpec {
            id: format!("b{}", out.len()),
            entries,
            gating: Vec::new(),
        });
    }
    out
}
