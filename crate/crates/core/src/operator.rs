//! Declarative description of operators with shifts `D = Σ_k D_k T^k` on `T^d`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use faer::c64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Translation `g(x) = x + θ` of the flat torus `T^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusIsometry {
    theta: Vec<f64>,
}

impl TorusIsometry {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::Schema("torus dimension must be at least 1".into()));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::Schema("theta must be finite".into()));
        }
        let theta = theta.into_iter().map(|t| t.rem_euclid(1.0)).collect();
        Ok(Self { theta })
    }

    pub fn d(&self) -> usize {
        self.theta.len()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// `g^n(x) = x + nθ`, not reduced modulo 1 (all consumers are 1-periodic).
    pub fn orbit_point(&self, x: &[f64], n: i64) -> Vec<f64> {
        x.iter().zip(&self.theta).map(|(xi, t)| xi + n as f64 * t).collect()
    }

    /// The codifferential `∂g = (ᵗdg)⁻¹` acting on covectors; the identity for translations.
    pub fn codifferential<'a>(&self, xi: &'a [f64]) -> &'a [f64] {
        xi
    }
}

/// One Fourier mode `c e^{2πi m·x}` of the coefficient in front of `∂_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffMode {
    /// Direction, zero based.
    pub j: usize,
    pub m: Vec<i64>,
    pub c: c64,
}

/// First-order operator `Σ_j c_j(x) ∂_j` with trigonometric-polynomial coefficients.
///
/// Its principal symbol is `Σ_j c_j(x) iξ_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct FirstOrderCoefficient {
    d: usize,
    modes: Vec<CoeffMode>,
}

impl FirstOrderCoefficient {
    /// Builds the coefficient from `(j, m, c)` triples, summing repeated modes
    /// and dropping exact zeros. `j` is zero based.
    pub fn new(d: usize, modes: impl IntoIterator<Item = (usize, Vec<i64>, c64)>) -> Result<Self> {
        let mut acc: BTreeMap<(usize, Vec<i64>), c64> = BTreeMap::new();
        for (j, m, c) in modes {
            if j >= d {
                return Err(Error::Schema(format!("direction {} out of range for d = {d}", j + 1)));
            }
            if m.len() != d {
                return Err(Error::Schema(format!("frequency {m:?} has wrong length for d = {d}")));
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::Schema("coefficient must be finite".into()));
            }
            *acc.entry((j, m)).or_insert(c64::new(0.0, 0.0)) += c;
        }
        let modes = acc
            .into_iter()
            .filter(|(_, c)| *c != c64::new(0.0, 0.0))
            .map(|((j, m), c)| CoeffMode { j, m, c })
            .collect();
        Ok(Self { d, modes })
    }

    /// Constant coefficients `c_j`.
    pub fn constant(c: &[c64]) -> Self {
        let d = c.len();
        Self::new(d, c.iter().enumerate().map(|(j, &cj)| (j, vec![0; d], cj)))
            .expect("constant coefficients are valid")
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn modes(&self) -> &[CoeffMode] {
        &self.modes
    }

    /// Largest `|m_i|` over all modes.
    pub fn max_frequency(&self) -> i64 {
        self.modes.iter().flat_map(|md| md.m.iter().map(|v| v.abs())).max().unwrap_or(0)
    }

    /// `c_j(x)`.
    pub fn coefficient(&self, j: usize, x: &[f64]) -> c64 {
        self.modes
            .iter()
            .filter(|md| md.j == j)
            .map(|md| md.c * phase(&md.m, x))
            .sum()
    }

    /// Principal symbol `Σ_j c_j(x) iξ_j`.
    pub fn principal(&self, x: &[f64], xi: &[f64]) -> c64 {
        let s: c64 = self.modes.iter().map(|md| md.c * phase(&md.m, x) * xi[md.j]).sum();
        c64::new(0.0, 1.0) * s
    }
}

/// `e^{2πi m·x}`.
pub fn phase(m: &[i64], x: &[f64]) -> c64 {
    let arg: f64 = m.iter().zip(x).map(|(mi, xi)| *mi as f64 * xi).sum();
    c64::cis(2.0 * PI * arg)
}

/// `D = Σ_k D_k T^k` with `(Tu)(x) = u(x + θ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftOperatorSpec {
    pub name: Option<String>,
    isometry: TorusIsometry,
    terms: BTreeMap<i64, FirstOrderCoefficient>,
}

impl ShiftOperatorSpec {
    pub fn new(isometry: TorusIsometry, terms: impl IntoIterator<Item = (i64, FirstOrderCoefficient)>) -> Result<Self> {
        let d = isometry.d();
        let mut map = BTreeMap::new();
        for (k, c) in terms {
            if c.d() != d {
                return Err(Error::Schema(format!("term k = {k} has dimension {} but the torus has {d}", c.d())));
            }
            if map.insert(k, c).is_some() {
                return Err(Error::Schema(format!("duplicate shift power k = {k}")));
            }
        }
        if map.is_empty() {
            return Err(Error::Schema("operator has no terms".into()));
        }
        Ok(Self { name: None, isometry, terms: map })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn d(&self) -> usize {
        self.isometry.d()
    }

    pub fn isometry(&self) -> &TorusIsometry {
        &self.isometry
    }

    pub fn theta(&self) -> &[f64] {
        self.isometry.theta()
    }

    pub fn terms(&self) -> &BTreeMap<i64, FirstOrderCoefficient> {
        &self.terms
    }

    pub fn max_shift(&self) -> usize {
        self.terms.keys().map(|k| k.unsigned_abs() as usize).max().unwrap_or(0)
    }

    pub fn max_frequency(&self) -> i64 {
        self.terms.values().map(|c| c.max_frequency()).max().unwrap_or(0)
    }

    /// True when no coefficient depends on `x`.
    pub fn is_constant_coefficient(&self) -> bool {
        self.max_frequency() == 0
    }

    /// Principal part of the formal adjoint `Σ_k T^{-k} D_k†`.
    ///
    /// The term of power `-k` carries the coefficient `-conj(c_j(x - kθ))`,
    /// whose mode at frequency `-m` is `-conj(c_{j,m}) e^{2πi m·kθ}`.
    pub fn principal_adjoint(&self) -> Self {
        let d = self.d();
        let theta = self.theta();
        let terms = self.terms.iter().map(|(&k, c)| {
            let modes = c.modes().iter().map(|md| {
                let shift: f64 = md.m.iter().zip(theta).map(|(mi, t)| *mi as f64 * k as f64 * t).sum();
                let val = -md.c.conj() * c64::cis(2.0 * PI * shift);
                (md.j, md.m.iter().map(|v| -v).collect(), val)
            });
            (-k, FirstOrderCoefficient::new(d, modes).expect("adjoint of a valid term is valid"))
        });
        let mut adj = Self::new(self.isometry.clone(), terms.collect::<Vec<_>>()).expect("adjoint of a valid spec is valid");
        adj.name = self.name.as_ref().map(|n| format!("{n}†"));
        adj
    }

    pub fn to_file(&self) -> SpecFile {
        SpecFile {
            name: self.name.clone(),
            d: self.d(),
            theta: self.theta().to_vec(),
            terms: self
                .terms
                .iter()
                .map(|(&k, c)| TermFile {
                    k,
                    coeffs: c
                        .modes()
                        .iter()
                        .map(|md| CoeffFile { j: md.j + 1, m: md.m.clone(), re: md.c.re, im: md.c.im })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn from_file(f: SpecFile) -> Result<Self> {
        if f.d == 0 {
            return Err(Error::Schema("d must be at least 1".into()));
        }
        if f.theta.len() != f.d {
            return Err(Error::Schema(format!("theta has {} entries, expected d = {}", f.theta.len(), f.d)));
        }
        let iso = TorusIsometry::new(f.theta)?;
        let mut terms = Vec::with_capacity(f.terms.len());
        for t in f.terms {
            let mut modes = Vec::with_capacity(t.coeffs.len());
            for c in t.coeffs {
                if c.j == 0 || c.j > f.d {
                    return Err(Error::Schema(format!("direction j = {} must lie in 1..={}", c.j, f.d)));
                }
                modes.push((c.j - 1, c.m, c64::new(c.re, c.im)));
            }
            terms.push((t.k, FirstOrderCoefficient::new(f.d, modes)?));
        }
        let mut spec = Self::new(iso, terms)?;
        spec.name = f.name;
        Ok(spec)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let f: SpecFile = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_file(f)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let f: SpecFile = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_file(f)
    }

    /// Reads a `.json` or `.toml` spec file.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => Self::from_toml_str(&text),
            _ => Self::from_json_str(&text),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("spec serializes")
    }

    /// SHA-256 of the canonical JSON form (name excluded), hex encoded.
    pub fn spec_hash(&self) -> String {
        let mut f = self.to_file();
        f.name = None;
        let bytes = serde_json::to_vec(&f).expect("spec serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// On-disk spec format. Complex numbers are split into `re` and `im`; `j` is one based.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub d: usize,
    pub theta: Vec<f64>,
    pub terms: Vec<TermFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermFile {
    pub k: i64,
    pub coeffs: Vec<CoeffFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffFile {
    pub j: usize,
    pub m: Vec<i64>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// Frequently used example operators.
pub mod examples {
    use super::*;

    fn re(v: f64) -> c64 {
        c64::new(v, 0.0)
    }

    /// `d/dx` on the circle.
    pub fn d_dx(theta: f64) -> ShiftOperatorSpec {
        ShiftOperatorSpec::new(
            TorusIsometry::new(vec![theta]).unwrap(),
            [(0, FirstOrderCoefficient::constant(&[re(1.0)]))],
        )
        .unwrap()
        .with_name("d/dx")
    }

    /// `d/dx + T∘(b d/dx)` on the circle.
    pub fn shifted_d_dx(b: f64, theta: f64) -> ShiftOperatorSpec {
        ShiftOperatorSpec::new(
            TorusIsometry::new(vec![theta]).unwrap(),
            [
                (0, FirstOrderCoefficient::constant(&[re(1.0)])),
                (1, FirstOrderCoefficient::constant(&[re(b)])),
            ],
        )
        .unwrap()
        .with_name(format!("d/dx + T({b} d/dx)"))
    }

    /// `(1 + a cos 2πx) d/dx + T∘(b d/dx)` on the circle.
    pub fn variable_d_dx(a: f64, b: f64, theta: f64) -> ShiftOperatorSpec {
        let c0 = FirstOrderCoefficient::new(
            1,
            [(0, vec![0], re(1.0)), (0, vec![1], re(a / 2.0)), (0, vec![-1], re(a / 2.0))],
        )
        .unwrap();
        ShiftOperatorSpec::new(
            TorusIsometry::new(vec![theta]).unwrap(),
            [(0, c0), (1, FirstOrderCoefficient::constant(&[re(b)]))],
        )
        .unwrap()
        .with_name(format!("(1 + {a} cos 2πx) d/dx + T({b} d/dx)"))
    }

    /// `(1 + a cos 2πx₁) ∂₁ + i∂₂ + T∘(b(∂₁ + i∂₂))` on `T²`.
    pub fn cauchy_riemann(a: f64, b: f64, theta: [f64; 2]) -> ShiftOperatorSpec {
        let c0 = FirstOrderCoefficient::new(
            2,
            [
                (0, vec![0, 0], re(1.0)),
                (0, vec![1, 0], re(a / 2.0)),
                (0, vec![-1, 0], re(a / 2.0)),
                (1, vec![0, 0], c64::new(0.0, 1.0)),
            ],
        )
        .unwrap();
        let c1 = FirstOrderCoefficient::constant(&[re(b), c64::new(0.0, b)]);
        ShiftOperatorSpec::new(TorusIsometry::new(theta.to_vec()).unwrap(), [(0, c0), (1, c1)])
            .unwrap()
            .with_name(format!("(1 + {a} cos 2πx₁)∂₁ + i∂₂ + T({b}(∂₁ + i∂₂))"))
    }

    /// `(1 + a cos 2πx₂) ∂₁ + i(1 + a cos 2πx₁) ∂₂ + T∘(b(∂₁ + i∂₂))` on `T²`.
    pub fn mixed_cauchy_riemann(a: f64, b: f64, theta: [f64; 2]) -> ShiftOperatorSpec {
        let half = a / 2.0;
        let c0 = FirstOrderCoefficient::new(
            2,
            [
                (0, vec![0, 0], re(1.0)),
                (0, vec![0, 1], re(half)),
                (0, vec![0, -1], re(half)),
                (1, vec![0, 0], c64::new(0.0, 1.0)),
                (1, vec![1, 0], c64::new(0.0, half)),
                (1, vec![-1, 0], c64::new(0.0, half)),
            ],
        )
        .unwrap();
        let c1 = FirstOrderCoefficient::constant(&[re(b), c64::new(0.0, b)]);
        ShiftOperatorSpec::new(TorusIsometry::new(theta.to_vec()).unwrap(), [(0, c0), (1, c1)])
            .unwrap()
            .with_name(format!("(1 + {a} cos 2πx₂)∂₁ + i(1 + {a} cos 2πx₁)∂₂ + T({b}(∂₁ + i∂₂))"))
    }
}
