//! Column and row names shared by the builders and the checkers.

pub fn capacity(generator: &str) -> String {
    format!("G:{generator}")
}

pub fn dispatch(generator: &str, t: usize) -> String {
    format!("g:{generator}:{t}")
}

pub fn flow(line: &str, t: usize) -> String {
    format!("f:{line}:{t}")
}

pub fn build(line: &str) -> String {
    format!("i:{line}")
}

pub fn angle(bus: &str, t: usize) -> String {
    format!("theta:{bus}:{t}")
}

pub fn kcl(bus: &str, t: usize) -> String {
    format!("kcl:{bus}:{t}")
}

pub fn kvl(line: &str, t: usize) -> String {
    format!("kvl:{line}:{t}")
}

pub fn kvl_bigm(line: &str, t: usize, side: &str) -> String {
    format!("kvlm:{line}:{t}:{side}")
}

pub fn slack(bus: &str, t: usize) -> String {
    format!("slack:{bus}:{t}")
}

pub fn slack_relaxed(bus: &str, t: usize, side: &str) -> String {
    format!("slack:{bus}:{t}:{side}")
}

pub fn cycle(id: &str, t: usize) -> String {
    format!("cyc:{id}:{t}")
}

pub fn candidate_cycle(id: &str, t: usize, side: &str) -> String {
    format!("ccyc:{id}:{t}:{side}")
}
