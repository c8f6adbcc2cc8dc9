use crate::netmodel::Network;

/// An ordered walk from one bus to another; each entry is a line position and
/// `+1` when the line is traversed from its `from_bus` to its `to_bus`.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub from: usize,
    pub to: usize,
    pub lines: Vec<(usize, i8)>,
    pub length: f64,
}

impl Path {
    pub fn hops(&self) -> usize {
        self.lines.len()
    }
}

/// Multigraph adjacency over a subset of lines, neighbours sorted by line id.
pub struct Adjacency {
    pub adj: Vec<Vec<(usize, usize, i8)>>,
}

impl Adjacency {
    pub fn new(net: &Network, allowed: impl Fn(usize) -> bool) -> Adjacency {
        let mut adj = vec![Vec::new(); net.n_buses()];
        for k in 0..net.lines().len() {
            if allowed(k) {
                let (a, b) = net.ends(k);
                adj[a].push((k, b, 1));
                adj[b].push((k, a, -1));
            }
        }
        for list in &mut adj {
            list.sort_by(|x, y| net.line(x.0).id.cmp(&net.line(y.0).id));
        }
        Adjacency { adj }
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

struct Label {
    dist: f64,
    seq: Vec<usize>,
    signs: Vec<i8>,
}

/// Path order: shorter, then fewer hops, then lexicographically smaller
/// sequence of line ids.
fn better(net: &Network, a: &Label, b: &Label) -> bool {
    if !close(a.dist, b.dist) {
        return a.dist < b.dist;
    }
    if a.seq.len() != b.seq.len() {
        return a.seq.len() < b.seq.len();
    }
    for (x, y) in a.seq.iter().zip(&b.seq) {
        match net.line(*x).id.cmp(&net.line(*y).id) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    false
}

/// Dijkstra over the lines accepted by `allowed` with non-negative weights.
pub fn shortest_path(
    net: &Network,
    from: usize,
    to: usize,
    weight: impl Fn(usize) -> f64,
    allowed: impl Fn(usize) -> bool,
) -> Option<Path> {
    let adj = Adjacency::new(net, allowed);
    shortest_path_in(net, &adj, from, to, weight)
}

pub fn shortest_path_in(
    net: &Network,
    adj: &Adjacency,
    from: usize,
    to: usize,
    weight: impl Fn(usize) -> f64,
) -> Option<Path> {
    let n = net.n_buses();
    let mut label: Vec<Option<Label>> = (0..n).map(|_| None).collect();
    let mut done = vec![false; n];
    label[from] = Some(Label {
        dist: 0.0,
        seq: Vec::new(),
        signs: Vec::new(),
    });
    loop {
        let mut pick: Option<usize> = None;
        for v in 0..n {
            if done[v] || label[v].is_none() {
                continue;
            }
            pick = match pick {
                Some(p) if !better(net, label[v].as_ref().unwrap(), label[p].as_ref().unwrap()) => Some(p),
                _ => Some(v),
            };
        }
        let u = pick?;
        done[u] = true;
        if u == to {
            break;
        }
        let (du, seq, signs) = {
            let l = label[u].as_ref().unwrap();
            (l.dist, l.seq.clone(), l.signs.clone())
        };
        for &(k, v, s) in &adj.adj[u] {
            if done[v] {
                continue;
            }
            let w = weight(k);
            debug_assert!(w >= 0.0, "negative weight on line {}", net.line(k).id);
            let mut cand = Label {
                dist: du + w,
                seq: seq.clone(),
                signs: signs.clone(),
            };
            cand.seq.push(k);
            cand.signs.push(s);
            let replace = match &label[v] {
                None => true,
                Some(cur) => better(net, &cand, cur),
            };
            if replace {
                label[v] = Some(cand);
            }
        }
    }
    let l = label[to].take()?;
    Some(Path {
        from,
        to,
        lines: l.seq.into_iter().zip(l.signs).collect(),
        length: l.dist,
    })
}
