//! Johnson's algorithm for the elementary circuits of a directed graph.

/// Calls `visit` with every elementary circuit of the digraph given by
/// `succ` (vertex lists must not contain duplicates). Each circuit starts at
/// its smallest vertex. Enumeration stops early when `visit` returns false.
pub fn simple_cycles(succ: &[Vec<usize>], mut visit: impl FnMut(&[usize]) -> bool) {
    let n = succ.len();
    let mut s = 0;
    while s < n {
        // strongly connected component of the subgraph on {s, .., n-1} that
        // contains its least vertex
        let Some((start, members)) = least_scc(succ, s) else {
            break;
        };
        let mut st = State {
            succ,
            members,
            blocked: vec![false; n],
            b: vec![Vec::new(); n],
            stack: Vec::new(),
            stop: false,
        };
        st.circuit(start, start, &mut visit);
        if st.stop {
            return;
        }
        s = start + 1;
    }
}

struct State<'a> {
    succ: &'a [Vec<usize>],
    members: Vec<bool>,
    blocked: Vec<bool>,
    b: Vec<Vec<usize>>,
    stack: Vec<usize>,
    stop: bool,
}

impl State<'_> {
    fn unblock(&mut self, u: usize) {
        let mut work = vec![u];
        while let Some(w) = work.pop() {
            if self.blocked[w] {
                self.blocked[w] = false;
                work.append(&mut self.b[w]);
            }
        }
    }

    fn circuit(&mut self, v: usize, s: usize, visit: &mut impl FnMut(&[usize]) -> bool) -> bool {
        let mut found = false;
        self.stack.push(v);
        self.blocked[v] = true;
        for &w in &self.succ[v] {
            if self.stop {
                break;
            }
            if !self.members[w] {
                continue;
            }
            if w == s {
                if !visit(&self.stack) {
                    self.stop = true;
                }
                found = true;
            } else if !self.blocked[w] && self.circuit(w, s, visit) {
                found = true;
            }
        }
        if found {
            self.unblock(v);
        } else {
            for &w in &self.succ[v] {
                if self.members[w] && !self.b[w].contains(&v) {
                    self.b[w].push(v);
                }
            }
        }
        self.stack.pop();
        found
    }
}

/// Among the non-trivial SCCs of the subgraph induced by `{from, ..}`, the
/// one holding the smallest vertex.
fn least_scc(succ: &[Vec<usize>], from: usize) -> Option<(usize, Vec<bool>)> {
    let n = succ.len();
    let comps = tarjan(succ, from);
    let mut best: Option<(usize, Vec<usize>)> = None;
    for c in comps {
        let single = c.len() == 1 && !succ[c[0]].contains(&c[0]);
        if single {
            continue;
        }
        let m = *c.iter().min().unwrap();
        if best.as_ref().is_none_or(|(bm, _)| m < *bm) {
            best = Some((m, c));
        }
    }
    best.map(|(m, c)| {
        let mut members = vec![false; n];
        for v in c {
            members[v] = true;
        }
        (m, members)
    })
}

fn tarjan(succ: &[Vec<usize>], from: usize) -> Vec<Vec<usize>> {
    let n = succ.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0;
    for root in from..n {
        if index[root] != usize::MAX {
            continue;
        }
        // iterative DFS: (vertex, next successor position)
        let mut call = vec![(root, 0usize)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < succ[v].len() {
                let w = succ[v][*pos];
                *pos += 1;
                if w < from {
                    continue;
                }
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(p, _)) = call.last() {
                    low[p] = low[p].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comps.push(comp);
                }
            }
        }
    }
    comps
}
