use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Observed entries of an `n_rows x n_cols` matrix, 0-based.
#[derive(Clone, Debug, PartialEq)]
pub struct Observations {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Observations {
    pub fn new(n_rows: usize, n_cols: usize, entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(entries.len());
        for &(i, j, v) in &entries {
            if i >= n_rows || j >= n_cols {
                return Err(Error::InvalidArgument(format!(
                    "entry ({i}, {j}) outside {n_rows} x {n_cols}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::NonFiniteValue(format!("observation ({i}, {j})")));
            }
            if !seen.insert((i, j)) {
                return Err(Error::DuplicateEntry { row: i, col: j });
            }
        }
        Ok(Observations {
            n_rows,
            n_cols,
            entries,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Default MovieLens 1M dimensions: users by movies.
pub const RATINGS_SHAPE: (usize, usize) = (6040, 3952);

/// Reads `UserID::MovieID::Rating::Timestamp` lines with 1-based ids.
/// Blank lines are skipped and the timestamp is ignored.
pub fn load_ratings(path: impl AsRef<Path>, shape: Option<(usize, usize)>) -> Result<Observations> {
    let text = fs::read_to_string(path)?;
    parse_ratings(&text, shape)
}

pub fn parse_ratings(text: &str, shape: Option<(usize, usize)>) -> Result<Observations> {
    let (n_rows, n_cols) = shape.unwrap_or(RATINGS_SHAPE);
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (k, line) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split("::").collect();
        let bad = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        if fields.len() != 4 {
            return Err(bad(format!("expected 4 fields, found {}", fields.len())));
        }
        let user: usize = fields[0]
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad user id '{}'", fields[0])))?;
        let movie: usize = fields[1]
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad movie id '{}'", fields[1])))?;
        let rating: f64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad rating '{}'", fields[2])))?;
        if user == 0 || user > n_rows || movie == 0 || movie > n_cols {
            return Err(bad(format!(
                "ids ({user}, {movie}) outside {n_rows} x {n_cols}"
            )));
        }
        if !rating.is_finite() {
            return Err(bad("non-finite rating".into()));
        }
        let (i, j) = (user - 1, movie - 1);
        if !seen.insert((i, j)) {
            return Err(Error::DuplicateEntry {
                row: user,
                col: movie,
            });
        }
        entries.push((i, j, rating));
    }
    Ok(Observations {
        n_rows,
        n_cols,
        entries,
    })
}

/// Reveals each entry of `U Vᵀ/√rank + noise·N(0,1)` independently with
/// probability `density`; `U`, `V` have standard normal entries.
pub fn gen_synthetic_completion(
    n: usize,
    p: usize,
    rank: usize,
    density: f64,
    noise: f64,
    seed: u64,
) -> Result<Observations> {
    if rank == 0 || rank > n.min(p) {
        return Err(Error::InvalidArgument(format!(
            "rank {rank} for a {n} x {p} matrix"
        )));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "density {density} must lie in (0, 1]"
        )));
    }
    if !(noise >= 0.0) {
        return Err(Error::InvalidArgument(format!("noise {noise}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let u: Vec<f64> = (0..n * rank).map(|_| normal()).collect();
    let v: Vec<f64> = (0..p * rank).map(|_| normal()).collect();
    let scale = 1.0 / (rank as f64).sqrt();
    let mut entries = Vec::new();
    for j in 0..p {
        for i in 0..n {
            let reveal = rng.random::<f64>() < density;
            let e: f64 = StandardNormal.sample(&mut rng);
            if reveal {
                let low: f64 = (0..rank).map(|r| u[i * rank + r] * v[j * rank + r]).sum();
                entries.push((i, j, low * scale + noise * e));
            }
        }
    }
    Observations::new(n, p, entries)
}
