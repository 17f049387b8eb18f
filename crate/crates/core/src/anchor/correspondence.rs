use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::io::{fmt_f64, write_text};

/// Point-to-point map from a source surface with `n1` vertices into a target
/// with `n2`. Need not be injective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Correspondence {
    map: Vec<Option<usize>>,
    n2: usize,
}

impl Correspondence {
    pub fn new(map: Vec<Option<usize>>, n2: usize) -> Result<Self> {
        if let Some((s, t)) = map
            .iter()
            .enumerate()
            .find_map(|(s, t)| t.filter(|&t| t >= n2).map(|t| (s, t)))
        {
            return Err(Error::BadIndex(format!(
                "source {s} maps to {t}, target has {n2} vertices"
            )));
        }
        Ok(Correspondence { map, n2 })
    }

    /// Total map from a plain target list.
    pub fn from_targets(targets: &[usize], n2: usize) -> Result<Self> {
        Self::new(targets.iter().map(|&t| Some(t)).collect(), n2)
    }

    pub fn identity(n: usize) -> Self {
        Correspondence {
            map: (0..n).map(Some).collect(),
            n2: n,
        }
    }

    pub fn n1(&self) -> usize {
        self.map.len()
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn get(&self, s: usize) -> Option<usize> {
        self.map[s]
    }

    pub fn set(&mut self, s: usize, t: Option<usize>) {
        assert!(t.is_none_or(|t| t < self.n2));
        self.map[s] = t;
    }

    pub fn as_slice(&self) -> &[Option<usize>] {
        &self.map
    }

    pub fn n_mapped(&self) -> usize {
        self.map.iter().filter(|t| t.is_some()).count()
    }

    pub fn is_total(&self) -> bool {
        self.map.iter().all(|t| t.is_some())
    }

    /// CSV with header `source_index,target_index`; unmapped sources are
    /// written with target `-1`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("source_index,target_index\n");
        for (i, t) in self.map.iter().enumerate() {
            match t {
                Some(t) => s.push_str(&format!("{i},{t}\n")),
                None => s.push_str(&format!("{i},-1\n")),
            }
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_text(path, &self.to_csv())
    }

    /// Reads a map CSV. `n1` defaults to one past the largest source index,
    /// `n2` to one past the largest target; given sizes are range-checked.
    pub fn read_csv(path: impl AsRef<Path>, n1: Option<usize>, n2: Option<usize>) -> Result<Self> {
        let path = path.as_ref();
        let rows = read_int_rows(path, 2)?;
        let mut pairs = Vec::with_capacity(rows.len());
        for (line, r) in rows {
            let s = usize::try_from(r[0]).map_err(|_| {
                Error::BadIndex(format!("{}:{line}: negative source index", path.display()))
            })?;
            let t = if r[1] < 0 { None } else { Some(r[1] as usize) };
            pairs.push((line, s, t));
        }
        let max_s = pairs.iter().map(|p| p.1 + 1).max().unwrap_or(0);
        let max_t = pairs
            .iter()
            .filter_map(|p| p.2.map(|t| t + 1))
            .max()
            .unwrap_or(0);
        let n1 = n1.unwrap_or(max_s);
        let n2 = n2.unwrap_or(max_t);
        let mut map = vec![None; n1];
        for (line, s, t) in pairs {
            if s >= n1 {
                return Err(Error::BadIndex(format!(
                    "{}:{line}: source index {s} out of range 0..{n1}",
                    path.display()
                )));
            }
            if let Some(t) = t {
                if t >= n2 {
                    return Err(Error::BadIndex(format!(
                        "{}:{line}: target index {t} out of range 0..{n2}",
                        path.display()
                    )));
                }
            }
            map[s] = t;
        }
        Correspondence::new(map, n2)
    }
}

/// Anchor pairs with the distortion each had when admitted.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSet {
    pub pairs: Vec<(usize, usize)>,
    pub distortion: Vec<f64>,
    pub epsilon: f64,
}

impl AnchorSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn sources(&self) -> impl Iterator<Item = usize> + '_ {
        self.pairs.iter().map(|p| p.0)
    }

    /// CSV with header `source_index,target_index,distortion`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("source_index,target_index,distortion\n");
        for (&(a, b), &d) in self.pairs.iter().zip(&self.distortion) {
            s.push_str(&format!("{a},{b},{}\n", fmt_f64(d)));
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_text(path, &self.to_csv())
    }
}

/// Integer CSV rows with at least `min_cols` columns; header skipped.
pub(crate) fn read_int_rows(path: &Path, min_cols: usize) -> Result<Vec<(usize, Vec<i64>)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| csv_err(path, e))?;
        if rec.len() < min_cols {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                msg: format!("expected {min_cols} columns"),
            });
        }
        let vals = rec
            .iter()
            .take(min_cols)
            .map(|f| {
                f.parse::<i64>().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    msg: format!("not an integer: {f:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        out.push((line, vals));
    }
    Ok(out)
}

pub(crate) fn csv_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            path: path.to_path_buf(),
            line,
            msg: format!("{other:?}"),
        },
    }
}
