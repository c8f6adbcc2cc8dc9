use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{invalid, Bus, Generator, Line, LineKind, NetError, Network, Snapshot};

struct Table {
    file: String,
    headers: Vec<String>,
    rows: Vec<(usize, Vec<String>)>,
}

impl Table {
    fn read(dir: &Path, name: &str, required: bool) -> Result<Option<Table>, NetError> {
        let path = dir.join(name);
        if !path.exists() {
            return if required {
                Err(NetError::MissingFile(path))
            } else {
                Ok(None)
            };
        }
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(&path)
            .map_err(|e| csv_error(name, e))?;
        let headers = rdr
            .headers()
            .map_err(|e| csv_error(name, e))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| csv_error(name, e))?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            rows.push((line, rec.iter().map(str::to_string).collect()));
        }
        Ok(Some(Table {
            file: name.to_string(),
            headers,
            rows,
        }))
    }

    fn col(&self, name: &str) -> Result<usize, NetError> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| NetError::Parse {
                file: self.file.clone(),
                row: 1,
                column: name.to_string(),
                message: "missing column".into(),
            })
    }

    fn opt_col(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    fn err(&self, row: usize, col: usize, message: impl Into<String>) -> NetError {
        NetError::Parse {
            file: self.file.clone(),
            row,
            column: self.headers.get(col).cloned().unwrap_or_default(),
            message: message.into(),
        }
    }

    fn text<'a>(&self, row: &'a (usize, Vec<String>), col: usize) -> Result<&'a str, NetError> {
        let v = row.1[col].as_str();
        if v.is_empty() {
            return Err(self.err(row.0, col, "empty value"));
        }
        Ok(v)
    }

    fn opt_text<'a>(&self, row: &'a (usize, Vec<String>), col: Option<usize>) -> Option<&'a str> {
        col.map(|c| row.1[c].as_str()).filter(|v| !v.is_empty())
    }

    fn num(&self, row: &(usize, Vec<String>), col: usize) -> Result<f64, NetError> {
        let v = self.text(row, col)?;
        parse_f64(v).ok_or_else(|| self.err(row.0, col, format!("not a number: `{v}`")))
    }

    fn opt_num(&self, row: &(usize, Vec<String>), col: Option<usize>) -> Result<Option<f64>, NetError> {
        match self.opt_text(row, col) {
            None => Ok(None),
            Some(v) => parse_f64(v)
                .map(Some)
                .ok_or_else(|| self.err(row.0, col.unwrap(), format!("not a number: `{v}`"))),
        }
    }
}

fn parse_f64(v: &str) -> Option<f64> {
    match v.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" => Some(f64::INFINITY),
        _ => v.parse().ok().filter(|x: &f64| !x.is_nan()),
    }
}

fn csv_error(file: &str, e: csv::Error) -> NetError {
    let row = e.position().map_or(0, |p| p.line() as usize);
    NetError::Parse {
        file: file.to_string(),
        row,
        column: String::new(),
        message: e.to_string(),
    }
}

/// Reads a `<entity> × snapshot` matrix whose header is `<key>,<index>,..`.
fn read_matrix(
    t: &Table,
    snapshots: &[Snapshot],
) -> Result<HashMap<String, (usize, Vec<f64>)>, NetError> {
    let mut cols = Vec::with_capacity(snapshots.len());
    for s in snapshots {
        let name = s.index.to_string();
        cols.push(t.col(&name)?);
    }
    let mut out = HashMap::new();
    for row in &t.rows {
        let key = t.text(row, 0)?.to_string();
        let values = cols.iter().map(|&c| t.num(row, c)).collect::<Result<Vec<_>, _>>()?;
        if out.insert(key.clone(), (row.0, values)).is_some() {
            return Err(t.err(row.0, 0, format!("duplicate entry `{key}`")));
        }
    }
    Ok(out)
}

pub fn load_network_csv(dir: &Path) -> Result<Network, NetError> {
    let required = |name| Table::read(dir, name, true).map(Option::unwrap);

    let st = required("snapshots.csv")?;
    let (ci, cw) = (st.col("index")?, st.col("weight")?);
    let mut snapshots = Vec::new();
    for row in &st.rows {
        let v = st.text(row, ci)?;
        let index = v.parse().map_err(|_| st.err(row.0, ci, format!("not an integer: `{v}`")))?;
        snapshots.push(Snapshot {
            index,
            weight: st.num(row, cw)?,
        });
    }
    let n_t = snapshots.len();

    let loads = match Table::read(dir, "load.csv", false)? {
        Some(t) => read_matrix(&t, &snapshots)?,
        None => HashMap::new(),
    };
    let bt = required("buses.csv")?;
    let (bi, bz) = (bt.col("id")?, bt.opt_col("zone_hint"));
    let mut buses = Vec::new();
    for row in &bt.rows {
        let id = bt.text(row, bi)?.to_string();
        let load = loads.get(&id).map_or_else(|| vec![0.0; n_t], |(_, v)| v.clone());
        buses.push(Bus {
            zone_hint: bt.opt_text(row, bz).map(str::to_string),
            id,
            load,
        });
    }
    for (id, (row, _)) in &loads {
        if !buses.iter().any(|b| &b.id == id) {
            return Err(invalid(format!("load.csv row {row}"), format!("bus `{id}` not found")));
        }
    }

    let lt = required("lines.csv")?;
    let c = |n| lt.col(n);
    let (li, lf, lto, lx, lcap, lk) = (c("id")?, c("from_bus")?, c("to_bus")?, c("x")?, c("F")?, c("kind")?);
    let (lcc, lcor, lmul) = (lt.opt_col("capital_cost"), lt.opt_col("corridor"), lt.opt_col("multiplicity"));
    let mut lines = Vec::new();
    for row in &lt.rows {
        let kind = match lt.text(row, lk)? {
            "existing" => LineKind::Existing,
            "candidate" => LineKind::Candidate,
            other => return Err(lt.err(row.0, lk, format!("kind must be existing or candidate, got `{other}`"))),
        };
        let multiplicity = match lt.opt_text(row, lmul) {
            None => 1,
            Some(v) => v
                .parse::<usize>()
                .ok()
                .filter(|&m| m >= 1)
                .ok_or_else(|| lt.err(row.0, lmul.unwrap(), format!("multiplicity must be a positive integer, got `{v}`")))?,
        };
        let line = Line {
            id: lt.text(row, li)?.to_string(),
            from_bus: lt.text(row, lf)?.to_string(),
            to_bus: lt.text(row, lto)?.to_string(),
            x: lt.num(row, lx)?,
            capacity: lt.num(row, lcap)?,
            kind,
            capital_cost: lt.opt_num(row, lcc)?.unwrap_or(0.0),
            corridor: lt.opt_text(row, lcor).map(str::to_string),
        };
        lines.extend(expand(line, multiplicity)?);
    }

    let avail = match Table::read(dir, "availability.csv", false)? {
        Some(t) => read_matrix(&t, &snapshots)?,
        None => HashMap::new(),
    };
    let mut generators = Vec::new();
    if let Some(gt) = Table::read(dir, "generators.csv", false)? {
        let c = |n| gt.col(n);
        let (gi, gb, gm, gc) = (c("id")?, c("bus")?, c("marginal_cost")?, c("capital_cost")?);
        let (gp, ge) = (gt.opt_col("p_nom_max"), gt.opt_col("emission_rate"));
        for row in &gt.rows {
            let id = gt.text(row, gi)?.to_string();
            let availability = avail.get(&id).map_or_else(|| vec![1.0; n_t], |(_, v)| v.clone());
            generators.push(Generator {
                bus: gt.text(row, gb)?.to_string(),
                marginal_cost: gt.num(row, gm)?,
                capital_cost: gt.num(row, gc)?,
                p_nom_max: gt.opt_num(row, gp)?.filter(|p| p.is_finite()),
                availability,
                emission_rate: gt.opt_num(row, ge)?.unwrap_or(0.0),
                id,
            });
        }
    }
    for (id, (row, _)) in &avail {
        if !generators.iter().any(|g| &g.id == id) {
            return Err(invalid(format!("availability.csv row {row}"), format!("generator `{id}` not found")));
        }
    }

    let mut co2_budget = None;
    if let Some(mt) = Table::read(dir, "meta.csv", false)? {
        let (mk, mv) = (mt.col("key")?, mt.col("value")?);
        for row in &mt.rows {
            match mt.text(row, mk)? {
                "co2_budget" => co2_budget = mt.opt_num(row, Some(mv))?,
                other => return Err(mt.err(row.0, mk, format!("unknown key `{other}`"))),
            }
        }
    }

    Network::new(buses, lines, generators, snapshots, co2_budget)
}

/// Expands a corridor declaration into `multiplicity` lines `<id>#1`.. .
fn expand(line: Line, multiplicity: usize) -> Result<Vec<Line>, NetError> {
    if multiplicity == 1 {
        return Ok(vec![line]);
    }
    if line.kind == LineKind::Existing {
        return Err(invalid(&line.id, "multiplicity is only allowed for candidate lines"));
    }
    let corridor = line.corridor.clone().or_else(|| Some(line.id.clone()));
    Ok((1..=multiplicity)
        .map(|n| Line {
            id: format!("{}#{n}", line.id),
            corridor: corridor.clone(),
            ..line.clone()
        })
        .collect())
}

fn fmt(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        v.to_string()
    }
}

pub fn write_network_csv(net: &Network, dir: &Path) -> Result<(), NetError> {
    std::fs::create_dir_all(dir)?;
    let w = |name: &str| -> Result<csv::Writer<std::fs::File>, NetError> {
        csv::Writer::from_path(dir.join(name)).map_err(|e| NetError::Io(e.into()))
    };
    let ioerr = |e: csv::Error| NetError::Io(e.into());
    let snap_header: Vec<String> = net.snapshots().iter().map(|s| s.index.to_string()).collect();

    let mut out = w("snapshots.csv")?;
    out.write_record(["index", "weight"]).map_err(ioerr)?;
    for s in net.snapshots() {
        out.write_record([s.index.to_string(), fmt(s.weight)]).map_err(ioerr)?;
    }
    out.flush()?;

    let mut out = w("buses.csv")?;
    out.write_record(["id", "zone_hint"]).map_err(ioerr)?;
    for b in net.buses() {
        out.write_record([b.id.as_str(), b.zone_hint.as_deref().unwrap_or("")]).map_err(ioerr)?;
    }
    out.flush()?;

    let mut out = w("load.csv")?;
    out.write_record(std::iter::once("bus".to_string()).chain(snap_header.iter().cloned()))
        .map_err(ioerr)?;
    for b in net.buses() {
        out.write_record(std::iter::once(b.id.clone()).chain(b.load.iter().map(|&v| fmt(v))))
            .map_err(ioerr)?;
    }
    out.flush()?;

    let mut out = w("lines.csv")?;
    out.write_record(["id", "from_bus", "to_bus", "x", "F", "kind", "capital_cost", "corridor", "multiplicity"])
        .map_err(ioerr)?;
    for l in net.lines() {
        let kind = match l.kind {
            LineKind::Existing => "existing",
            LineKind::Candidate => "candidate",
        };
        out.write_record([
            l.id.clone(),
            l.from_bus.clone(),
            l.to_bus.clone(),
            fmt(l.x),
            fmt(l.capacity),
            kind.to_string(),
            fmt(l.capital_cost),
            l.corridor.clone().unwrap_or_default(),
            "1".to_string(),
        ])
        .map_err(ioerr)?;
    }
    out.flush()?;

    let mut out = w("generators.csv")?;
    out.write_record(["id", "bus", "marginal_cost", "capital_cost", "p_nom_max", "emission_rate"])
        .map_err(ioerr)?;
    for g in net.generators() {
        out.write_record([
            g.id.clone(),
            g.bus.clone(),
            fmt(g.marginal_cost),
            fmt(g.capital_cost),
            g.p_nom_max.map(fmt).unwrap_or_default(),
            fmt(g.emission_rate),
        ])
        .map_err(ioerr)?;
    }
    out.flush()?;

    let mut out = w("availability.csv")?;
    out.write_record(std::iter::once("generator".to_string()).chain(snap_header.iter().cloned()))
        .map_err(ioerr)?;
    for g in net.generators() {
        out.write_record(std::iter::once(g.id.clone()).chain(g.availability.iter().map(|&v| fmt(v))))
            .map_err(ioerr)?;
    }
    out.flush()?;

    let meta = dir.join("meta.csv");
    match net.co2_budget() {
        Some(b) => {
            let mut out = w("meta.csv")?;
            out.write_record(["key", "value"]).map_err(ioerr)?;
            out.write_record(["co2_budget".to_string(), fmt(b)]).map_err(ioerr)?;
            out.flush()?;
        }
        None if meta.exists() => std::fs::remove_file(meta)?,
        None => {}
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct LineDoc {
    #[serde(flatten)]
    line: Line,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    multiplicity: usize,
}

fn one() -> usize {
    1
}

fn is_one(m: &usize) -> bool {
    *m == 1
}

#[derive(Serialize, Deserialize)]
struct NetworkDoc {
    buses: Vec<Bus>,
    lines: Vec<LineDoc>,
    #[serde(default)]
    generators: Vec<Generator>,
    snapshots: Vec<Snapshot>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    co2_budget: Option<f64>,
}

pub fn network_from_json(text: &str) -> Result<Network, NetError> {
    let doc: NetworkDoc = serde_json::from_str(text).map_err(|e| NetError::Parse {
        file: "network.json".into(),
        row: e.line(),
        column: e.column().to_string(),
        message: e.to_string(),
    })?;
    let mut lines = Vec::new();
    for d in doc.lines {
        if d.multiplicity == 0 {
            return Err(invalid(&d.line.id, "multiplicity must be a positive integer"));
        }
        lines.extend(expand(d.line, d.multiplicity)?);
    }
    Network::new(doc.buses, lines, doc.generators, doc.snapshots, doc.co2_budget)
}

pub fn network_to_json(net: &Network) -> String {
    let doc = NetworkDoc {
        buses: net.buses().to_vec(),
        lines: net
            .lines()
            .iter()
            .map(|l| LineDoc {
                line: l.clone(),
                multiplicity: 1,
            })
            .collect(),
        generators: net.generators().to_vec(),
        snapshots: net.snapshots().to_vec(),
        co2_budget: net.co2_budget(),
    };
    serde_json::to_string_pretty(&doc).expect("network documents always serialise")
}

pub fn load_network_json(path: &Path) -> Result<Network, NetError> {
    if !path.exists() {
        return Err(NetError::MissingFile(path.to_path_buf()));
    }
    network_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_network_json(net: &Network, path: &Path) -> Result<(), NetError> {
    std::fs::write(path, network_to_json(net) + "\n")?;
    Ok(())
}

/// Loads a `network.json` file, or a directory holding either the CSV set or
/// a `network.json`.
pub fn load_network(path: &Path) -> Result<Network, NetError> {
    if path.is_file() {
        return load_network_json(path);
    }
    if !path.exists() {
        return Err(NetError::MissingFile(path.to_path_buf()));
    }
    let json = path.join("network.json");
    if json.exists() && !path.join("buses.csv").exists() {
        return load_network_json(&json);
    }
    load_network_csv(path)
}
