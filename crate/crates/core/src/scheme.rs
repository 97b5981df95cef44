//! Approximation-scheme profiles: the alternation-count map `n -> m_n` plus
//! the structural metadata of the scheme.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SchemeKind {
    /// Algebraic polynomials of degree at most `n`; `m_n = n + 1`.
    Polynomial,
    /// Rationals `R_{n_k, m_k}` with poles off the interval, one degree pair
    /// per level. `alternation` overrides the default count `n_k + m_k + 1`.
    Rational {
        degrees: Vec<(usize, usize)>,
        alternation: Option<Vec<usize>>,
    },
    /// Splines with `n` free knots over the pieces of a base scheme;
    /// `m_n = (n + 1)^2 * base_n`.
    FreeKnotSpline { base: Box<SchemeProfile> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeProfile {
    pub name: String,
    pub kind: SchemeKind,
}

impl SchemeProfile {
    pub fn polynomial() -> Self {
        SchemeProfile { name: "polynomial".into(), kind: SchemeKind::Polynomial }
    }

    pub fn rational(degrees: Vec<(usize, usize)>) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::InvalidProfile("rational scheme needs at least one (n_k, m_k) pair".into()));
        }
        Ok(SchemeProfile {
            name: "rational".into(),
            kind: SchemeKind::Rational { degrees, alternation: None },
        })
    }

    /// Replaces the default rational alternation counts.
    pub fn with_alternation(mut self, counts: Vec<usize>) -> Result<Self> {
        let SchemeKind::Rational { degrees, alternation } = &mut self.kind else {
            return Err(Error::InvalidProfile("alternation override applies to rational schemes only".into()));
        };
        if counts.len() != degrees.len() {
            return Err(Error::InvalidProfile(format!(
                "override has {} counts for {} degree pairs",
                counts.len(),
                degrees.len()
            )));
        }
        if counts.contains(&0) {
            return Err(Error::InvalidProfile("alternation counts must be >= 1".into()));
        }
        *alternation = Some(counts);
        Ok(self)
    }

    pub fn free_knot_spline(base: SchemeProfile) -> Self {
        SchemeProfile {
            name: format!("spline({})", base.name),
            kind: SchemeKind::FreeKnotSpline { base: Box::new(base) },
        }
    }

    /// Reads `(n_k, m_k)` pairs from a two-column CSV; an optional third
    /// column overrides the alternation count of that row.
    pub fn rational_from_csv(path: &Path) -> Result<Self> {
        let csv_err = |source| Error::Csv { path: path.to_owned(), source };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .flexible(true)
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(csv_err)?;
        let mut degrees = Vec::new();
        let mut overrides = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(csv_err)?;
            if record.iter().all(str::is_empty) {
                continue;
            }
            let fields: Vec<Option<usize>> = record.iter().map(|f| f.parse().ok()).collect();
            match fields.as_slice() {
                [Some(n), Some(m)] => degrees.push((*n, *m)),
                [Some(n), Some(m), Some(k)] => {
                    degrees.push((*n, *m));
                    overrides.push(*k);
                }
                _ if row == 0 => continue,
                _ => {
                    return Err(Error::InvalidProfile(format!(
                        "{}: row {}: expected `n_k,m_k[,count]` naturals",
                        path.display(),
                        row + 1
                    )))
                }
            }
        }
        let profile = Self::rational(degrees)?;
        match overrides.len() {
            0 => Ok(profile),
            _ => profile.with_alternation(overrides),
        }
    }

    /// `m_n`: the number of sign changes an alternation certificate needs
    /// at level `n` (the certificate has `m_n + 1` points).
    pub fn phi(&self, n: usize) -> Result<usize> {
        match &self.kind {
            SchemeKind::Polynomial => Ok(n + 1),
            SchemeKind::Rational { degrees, alternation } => {
                let out_of_range = || Error::IndexOutOfRange {
                    scheme: self.name.clone(),
                    index: n,
                    available: degrees.len(),
                };
                match alternation {
                    Some(counts) => counts.get(n).copied().ok_or_else(out_of_range),
                    None => degrees.get(n).map(|(p, q)| p + q + 1).ok_or_else(out_of_range),
                }
            }
            SchemeKind::FreeKnotSpline { base } => {
                let m = base.phi(n)?;
                (n + 1)
                    .checked_mul(n + 1)
                    .and_then(|sq| sq.checked_mul(m))
                    .ok_or_else(|| Error::InvalidProfile(format!("alternation count overflows at level {n}")))
            }
        }
    }

    /// Number of levels for which `phi` is defined, if finite.
    pub fn levels(&self) -> Option<usize> {
        match &self.kind {
            SchemeKind::Polynomial => None,
            SchemeKind::Rational { degrees, .. } => Some(degrees.len()),
            SchemeKind::FreeKnotSpline { base } => base.levels(),
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.kind, SchemeKind::Polynomial)
    }

    pub fn is_haar(&self) -> bool {
        matches!(self.kind, SchemeKind::Polynomial)
    }

    pub fn is_polynomial(&self) -> bool {
        matches!(self.kind, SchemeKind::Polynomial)
    }

    /// The sum map `A_n + A_n ⊆ A_{K(n)}`. Metadata only.
    pub fn k_map(&self, n: usize) -> usize {
        if self.is_linear() {
            n
        } else {
            2 * n + 1
        }
    }
}
