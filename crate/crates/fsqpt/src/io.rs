//! CSV tables. Every float is written with 17 significant digits.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use fsqpt_core::prelude::*;
use fsqpt_core::pulse::{carrier_label, parse_carrier_label};
use fsqpt_core::tensor::chi_labels;

pub const SIGNAL_HEADER: [&str; 4] = ["T_fs", "omega", "re", "im"];
pub const PATHWAY_HEADER: [&str; 7] = ["T_fs", "p", "q", "r", "s", "re", "im"];
pub const TENSOR_HEADER: [&str; 7] = ["T_fs", "n", "m", "nu", "mu", "re", "im"];

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {reason}")]
    Parse { path: PathBuf, line: u64, reason: String },
}

pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> IoError + '_ {
    move |e| {
        let line = e.position().map(|p| p.line()).unwrap_or(0);
        match e.into_kind() {
            csv::ErrorKind::Io(source) => IoError::Io {
                path: path.to_path_buf(),
                source,
            },
            other => IoError::Parse {
                path: path.to_path_buf(),
                line,
                reason: format!("{other:?}"),
            },
        }
    }
}

fn write_rows<I>(path: &Path, header: &[&str], rows: I) -> Result<(), IoError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header).map_err(csv_err(path))?;
    for r in rows {
        w.write_record(&r).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    let mut f = File::create(path).map_err(io_err(path))?;
    f.write_all(text.as_bytes()).map_err(io_err(path))
}

pub fn write_signals(path: &Path, table: &SignalTable) -> Result<(), IoError> {
    let rows = table.waiting_times.iter().zip(table.rows.iter()).flat_map(|(&t, row)| {
        row.iter().enumerate().map(move |(k, z)| {
            let label = String::from_utf8(carrier_label(k).to_vec()).unwrap();
            vec![fmt(t), label, fmt(z.re), fmt(z.im)]
        })
    });
    write_rows(path, &SIGNAL_HEADER, rows)
}

pub fn write_pathways(path: &Path, sets: &[PathwaySignalSet]) -> Result<(), IoError> {
    let rows = sets.iter().flat_map(|s| {
        PathwayLabels::all().map(move |l| {
            let z = s.get(l);
            let mut r = vec![fmt(s.waiting_time)];
            r.extend(l.0.iter().map(|x| x.symbol().to_string()));
            r.extend([fmt(z.re), fmt(z.im)]);
            r
        })
    });
    write_rows(path, &PATHWAY_HEADER, rows)
}

/// The sixteen single-exciton elements followed by the four χ_ggνμ.
pub fn write_tensors(path: &Path, tensors: &[ProcessTensor]) -> Result<(), IoError> {
    let rows = tensors.iter().flat_map(|chi| {
        let t = chi.waiting_time;
        let singles = (0..16).map(move |k| {
            let z = chi.elements[k];
            let mut r = vec![fmt(t)];
            r.extend(chi_labels(k).iter().map(|x| x.symbol().to_string()));
            r.extend([fmt(z.re), fmt(z.im)]);
            r
        });
        let ground = (0..4).map(move |k| {
            let z = chi.ground_row[k];
            let (nu, mu) = (Exciton::from_index(k / 2), Exciton::from_index(k % 2));
            vec![
                fmt(t),
                "g".into(),
                "g".into(),
                nu.symbol().into(),
                mu.symbol().into(),
                fmt(z.re),
                fmt(z.im),
            ]
        });
        singles.chain(ground)
    });
    write_rows(path, &TENSOR_HEADER, rows)
}

struct Reader {
    path: PathBuf,
    inner: csv::Reader<File>,
}

impl Reader {
    fn open(path: &Path, header: &[&str]) -> Result<Self, IoError> {
        let file = File::open(path).map_err(io_err(path))?;
        let mut inner = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
        let h = inner.headers().map_err(csv_err(path))?.clone();
        if h.iter().collect::<Vec<_>>() != header {
            return Err(IoError::Parse {
                path: path.to_path_buf(),
                line: 1,
                reason: format!("expected header {}", header.join(",")),
            });
        }
        Ok(Reader {
            path: path.to_path_buf(),
            inner,
        })
    }

    fn records(&mut self) -> Result<Vec<(u64, csv::StringRecord)>, IoError> {
        let mut out = Vec::new();
        for r in self.inner.records() {
            let r = r.map_err(csv_err(&self.path))?;
            let line = r.position().map(|p| p.line()).unwrap_or(0);
            out.push((line, r));
        }
        Ok(out)
    }

    fn err(&self, line: u64, reason: impl Into<String>) -> IoError {
        IoError::Parse {
            path: self.path.clone(),
            line,
            reason: reason.into(),
        }
    }

    fn float(&self, line: u64, field: &str, what: &str) -> Result<f64, IoError> {
        field
            .parse::<f64>()
            .map_err(|_| self.err(line, format!("{what}: `{field}` is not a number")))
    }
}

fn level(s: &str) -> Option<Level> {
    match s {
        "g" => Some(Level::G),
        "e" => Some(Level::E),
        "e'" => Some(Level::EPrime),
        _ => None,
    }
}

/// Rows of one waiting time, each tagged with its file line.
type TimeBlock<T> = (f64, Vec<(u64, T)>);

/// Groups rows by waiting time; rows of one T must be contiguous.
fn group_by_time<T>(rd: &Reader, rows: Vec<(u64, f64, T)>, per_block: usize) -> Result<Vec<TimeBlock<T>>, IoError> {
    let mut out: Vec<TimeBlock<T>> = Vec::new();
    for (line, t, item) in rows {
        match out.last_mut() {
            Some((last, v)) if *last == t => v.push((line, item)),
            Some((last, _)) if t < *last => {
                return Err(rd.err(line, format!("T = {t} fs out of order")));
            }
            _ => out.push((t, vec![(line, item)])),
        }
    }
    for (t, v) in &out {
        if v.len() != per_block {
            let line = v.last().map(|x| x.0).unwrap_or(0);
            return Err(rd.err(line, format!("T = {t} fs has {} rows, expected {per_block}", v.len())));
        }
    }
    Ok(out)
}

pub fn read_signals(path: &Path, gamma: f64) -> Result<SignalTable, IoError> {
    let mut rd = Reader::open(path, &SIGNAL_HEADER)?;
    let mut rows = Vec::new();
    for (line, r) in rd.records()? {
        let t = rd.float(line, &r[0], "T_fs")?;
        let k = parse_carrier_label(&r[1]).ok_or_else(|| rd.err(line, format!("bad omega label `{}`", &r[1])))?;
        let z = C64::new(rd.float(line, &r[2], "re")?, rd.float(line, &r[3], "im")?);
        rows.push((line, t, (k, z)));
    }
    let mut table = SignalTable {
        gamma,
        waiting_times: Vec::new(),
        rows: Vec::new(),
    };
    for (t, block) in group_by_time(&rd, rows, 16)? {
        let mut row = [C64::new(0.0, 0.0); 16];
        let mut seen = [false; 16];
        for (line, (k, z)) in block {
            if seen[k] {
                return Err(rd.err(line, "duplicate omega label"));
            }
            seen[k] = true;
            row[k] = z;
        }
        table.waiting_times.push(t);
        table.rows.push(row);
    }
    Ok(table)
}

pub fn read_tensors(path: &Path) -> Result<Vec<ProcessTensor>, IoError> {
    let mut rd = Reader::open(path, &TENSOR_HEADER)?;
    let mut rows = Vec::new();
    for (line, r) in rd.records()? {
        let t = rd.float(line, &r[0], "T_fs")?;
        let mut lv = [Level::G; 4];
        for (k, slot) in lv.iter_mut().enumerate() {
            *slot = level(&r[1 + k]).ok_or_else(|| rd.err(line, format!("bad level `{}`", &r[1 + k])))?;
        }
        let z = C64::new(rd.float(line, &r[5], "re")?, rd.float(line, &r[6], "im")?);
        rows.push((line, t, (lv, z)));
    }
    let mut out = Vec::new();
    for (t, block) in group_by_time(&rd, rows, 20)? {
        let mut chi = ProcessTensor::identity(t);
        let mut seen = [false; 20];
        for (line, (lv, z)) in block {
            let slot = match lv.map(|l| l.exciton()) {
                [Some(n), Some(m), Some(nu), Some(mu)] => fsqpt_core::tensor::chi_index(n, m, nu, mu),
                [None, None, Some(nu), Some(mu)] => 16 + nu.index() * 2 + mu.index(),
                _ => return Err(rd.err(line, "element outside the single-exciton tensor")),
            };
            if seen[slot] {
                return Err(rd.err(line, "duplicate element"));
            }
            seen[slot] = true;
            if slot < 16 {
                chi.elements[slot] = z;
            } else {
                chi.ground_row[slot - 16] = z;
            }
        }
        out.push(chi);
    }
    Ok(out)
}

/// File names inside an output directory.
pub fn gamma_tag(gamma: f64) -> String {
    format!("{gamma:.2}")
}

pub fn signal_file(dir: &Path, gamma: f64) -> PathBuf {
    dir.join(format!("signals_gamma_{}.csv", gamma_tag(gamma)))
}

pub fn pathway_file(dir: &Path, gamma: f64) -> PathBuf {
    dir.join(format!("pathways_gamma_{}.csv", gamma_tag(gamma)))
}

pub fn chi_file(dir: &Path, gamma: f64) -> PathBuf {
    dir.join(format!("chi_gamma_{}.csv", gamma_tag(gamma)))
}

pub fn truth_file(dir: &Path) -> PathBuf {
    dir.join("chi_truth.csv")
}

pub fn manifest_file(dir: &Path) -> PathBuf {
    dir.join("manifest.json")
}
