//! Plug-in entropies, mutual information, Lambert W0 and the μ threshold.

use num_traits::Float;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::SymbolicDatabase;

fn c<T: Float>(v: f64) -> T {
    T::from(v).unwrap()
}

fn check_distribution<T: Float>(p: &[T]) -> Result<()> {
    let mut sum = T::zero();
    for &x in p {
        if !x.is_finite() || x < T::zero() {
            return Err(Error::Distribution(format!(
                "entry {} is negative or not finite",
                x.to_f64().unwrap_or(f64::NAN)
            )));
        }
        sum = sum + x;
    }
    if (sum - T::one()).abs() > c::<T>(1e-9).max(T::epsilon() * c(16.0)) {
        return Err(Error::Distribution(format!(
            "entries sum to {}",
            sum.to_f64().unwrap_or(f64::NAN)
        )));
    }
    Ok(())
}

#[inline]
fn plogp<T: Float>(p: T) -> T {
    if p > T::zero() {
        p * p.log2()
    } else {
        T::zero()
    }
}

/// Shannon entropy in bits.
pub fn entropy<T: Float>(dist: &[T]) -> Result<T> {
    check_distribution(dist)?;
    Ok(entropy_unchecked(dist))
}

fn entropy_unchecked<T: Float>(dist: &[T]) -> T {
    let h = -dist.iter().fold(T::zero(), |acc, &p| acc + plogp(p));
    h.max(T::zero())
}

/// Joint distribution of `(X, Y)`, rows indexed by `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointDist<T> {
    rows: usize,
    cols: usize,
    p: Vec<T>,
}

impl<T: Float> JointDist<T> {
    pub fn new(rows: usize, cols: usize, p: Vec<T>) -> Result<Self> {
        if p.len() != rows * cols {
            return Err(Error::Distribution(format!(
                "{} entries for a {rows}x{cols} table",
                p.len()
            )));
        }
        check_distribution(&p)?;
        Ok(Self { rows, cols, p })
    }

    /// Relative frequencies of a count table.
    pub fn from_counts(rows: usize, cols: usize, counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::Distribution("no observations".into()));
        }
        let t = T::from(total).unwrap();
        Self::new(
            rows,
            cols,
            counts.iter().map(|&n| T::from(n).unwrap() / t).collect(),
        )
    }

    pub fn get(&self, x: usize, y: usize) -> T {
        self.p[x * self.cols + y]
    }

    pub fn marginal_x(&self) -> Vec<T> {
        (0..self.rows)
            .map(|x| (0..self.cols).fold(T::zero(), |a, y| a + self.get(x, y)))
            .collect()
    }

    pub fn marginal_y(&self) -> Vec<T> {
        (0..self.cols)
            .map(|y| (0..self.rows).fold(T::zero(), |a, x| a + self.get(x, y)))
            .collect()
    }

    /// The same distribution viewed as `(Y, X)`.
    pub fn transpose(&self) -> Self {
        let mut p = Vec::with_capacity(self.p.len());
        for y in 0..self.cols {
            for x in 0..self.rows {
                p.push(self.get(x, y));
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            p,
        }
    }
}

/// `H(X | Y)` in bits.
pub fn conditional_entropy<T: Float>(joint: &JointDist<T>) -> T {
    let py = joint.marginal_y();
    let mut h = T::zero();
    for x in 0..joint.rows {
        for (y, &q) in py.iter().enumerate() {
            let p = joint.get(x, y);
            if p > T::zero() {
                h = h - p * (p / q).log2();
            }
        }
    }
    h.max(T::zero())
}

/// `I(X; Y) = H(X) - H(X | Y)`, floored at zero against rounding.
pub fn mutual_information<T: Float>(joint: &JointDist<T>) -> T {
    (entropy_unchecked(&joint.marginal_x()) - conditional_entropy(joint)).max(T::zero())
}

/// `I(X; Y) / H(X)`; zero when `X` is constant.
pub fn nmi<T: Float>(joint: &JointDist<T>) -> T {
    let hx = entropy_unchecked(&joint.marginal_x());
    if hx <= T::zero() {
        return T::zero();
    }
    (mutual_information(joint) / hx).min(T::one())
}

/// Marginal and pairwise joint symbol frequencies over every fine position.
#[derive(Debug, Clone)]
pub struct ProbTable<T> {
    marginals: Vec<Vec<T>>,
    /// Upper triangle, `(i, j)` with `i < j`, row-major by `i`.
    joints: Vec<JointDist<T>>,
    n_series: usize,
}

impl<T: Float + Send + Sync> ProbTable<T> {
    pub fn from_db(db: &SymbolicDatabase) -> Result<Self> {
        let series = db.series();
        if db.is_empty() {
            return Err(Error::Distribution("empty database".into()));
        }
        let marginals = series
            .iter()
            .map(|s| {
                let mut counts = vec![0u64; s.alphabet.len()];
                for &x in &s.symbols {
                    counts[x as usize] += 1;
                }
                JointDist::from_counts(1, counts.len(), &counts).map(|j| j.p)
            })
            .collect::<Result<Vec<_>>>()?;
        let n = series.len();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let joints = pairs
            .par_iter()
            .map(|&(i, j)| {
                let (a, b) = (&series[i], &series[j]);
                let cols = b.alphabet.len();
                let mut counts = vec![0u64; a.alphabet.len() * cols];
                for (&x, &y) in a.symbols.iter().zip(&b.symbols) {
                    counts[x as usize * cols + y as usize] += 1;
                }
                JointDist::from_counts(a.alphabet.len(), cols, &counts)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            marginals,
            joints,
            n_series: n,
        })
    }

    pub fn marginal(&self, series: usize) -> &[T] {
        &self.marginals[series]
    }

    /// Joint of `(X_x, X_y)` with rows indexed by symbols of `x`.
    pub fn joint(&self, x: usize, y: usize) -> JointDist<T> {
        assert!(x != y, "joint of a series with itself");
        let (i, j) = if x < y { (x, y) } else { (y, x) };
        let idx = i * (2 * self.n_series - i - 1) / 2 + (j - i - 1);
        if x < y {
            self.joints[idx].clone()
        } else {
            self.joints[idx].transpose()
        }
    }

    pub fn entropy(&self, series: usize) -> T {
        entropy_unchecked(&self.marginals[series])
    }

    /// `(NMI(X; Y), NMI(Y; X))`.
    pub fn nmi_pair(&self, x: usize, y: usize) -> (T, T) {
        let j = self.joint(x, y);
        (nmi(&j), nmi(&j.transpose()))
    }
}

/// Principal branch of the Lambert W function, by Halley iteration.
pub fn lambert_w0<T: Float>(x: T) -> Result<T> {
    let e = c::<T>(std::f64::consts::E);
    let branch = -e.recip();
    if x.is_nan() || x < branch - c(1e-12) {
        return Err(Error::LambertDomain(x.to_f64().unwrap_or(f64::NAN)));
    }
    if x.is_infinite() {
        return Ok(x);
    }
    if x <= branch {
        return Ok(-T::one());
    }
    if x == T::zero() {
        return Ok(T::zero());
    }
    let mut w = if x < c(-0.25) {
        // Series about the branch point.
        let p = (c::<T>(2.0) * (e * x + T::one())).sqrt();
        -T::one() + p - p * p / c(3.0) + c::<T>(11.0 / 72.0) * p * p * p
    } else if x <= e {
        x / (T::one() + x)
    } else {
        let l = x.ln();
        l - l.ln()
    };
    let tol = c::<T>(1e-12).max(T::epsilon() * c(4.0));
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        if f == T::zero() {
            break;
        }
        let wp1 = w + T::one();
        let denom = ew * wp1 - (w + c(2.0)) * f / (c::<T>(2.0) * wp1);
        if denom == T::zero() || !denom.is_finite() {
            break;
        }
        let dw = f / denom;
        w = (w - dw).max(-T::one());
        if dw.abs() <= tol * (T::one() + w.abs()) {
            break;
        }
    }
    Ok(w)
}

fn check_prob<T: Float>(p: T, allow_one: bool) -> Result<()> {
    let ok = p > T::zero() && (p < T::one() || (allow_one && p == T::one()));
    if ok {
        Ok(())
    } else {
        Err(Error::DegenerateProbability(p.to_f64().unwrap_or(f64::NAN)))
    }
}

/// Lower bound on the maxSeason of an event pair `(X_1, Y_1)` whose series
/// satisfy `NMI(X; Y) >= mu`, where `lambda1` is the smallest symbol
/// probability of `X` and `lambda2 = p(Y_1)`.
pub fn season_lower_bound<T: Float>(lambda1: T, lambda2: T, mu: T, n: usize, min_density: u32) -> Result<T> {
    check_prob(lambda1, true)?;
    check_prob(lambda2, true)?;
    if min_density == 0 || !mu.is_finite() {
        return Err(Error::config("min_density must be positive and mu finite"));
    }
    let arg = (T::one() - mu) * lambda1.ln() / lambda2;
    let w = lambert_w0(arg)?;
    let scale = lambda2 * T::from(n).unwrap() / T::from(min_density).unwrap();
    Ok(scale * w.exp())
}

/// The smallest NMI for which the pair bound still reaches `min_season`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MuThreshold<T> {
    /// Unclamped value; `<= 0` admits every pair, `> 1` admits none.
    pub raw: T,
    /// `min_season * min_density / (lambda2 * N)`.
    pub rho: T,
    /// True when `rho <= 1/e` and the threshold sits at the Lambert domain edge.
    pub boundary_branch: bool,
}

impl<T: Float> MuThreshold<T> {
    pub fn admits(&self, nmi: T) -> bool {
        if self.raw <= T::zero() {
            true
        } else if self.raw > T::one() {
            false
        } else {
            nmi >= self.raw
        }
    }

    /// The threshold clamped into `(0, 1]`.
    pub fn clamped(&self) -> T {
        self.raw.max(T::min_positive_value()).min(T::one())
    }
}

/// Threshold used while `rho <= 1/e`.
pub fn mu_at_domain_edge<T: Float>(lambda1: T, lambda2: T) -> T {
    let e = c::<T>(std::f64::consts::E);
    T::one() - lambda2 / (e * lambda1.recip().ln())
}

/// Threshold used while `rho > 1/e`.
pub fn mu_interior<T: Float>(lambda1: T, lambda2: T, rho: T) -> T {
    T::one() - rho * lambda2 * rho.ln() / lambda1.ln()
}

/// Two branches split at `rho = 1/e`. Below it every admissible Lambert
/// argument already clears `min_season`, so the threshold is where the
/// argument reaches `-1/e`; above it the threshold solves `W(a) = ln rho`.
pub fn mu_threshold<T: Float>(
    lambda1: T,
    lambda2: T,
    min_season: u32,
    min_density: u32,
    n: usize,
) -> Result<MuThreshold<T>> {
    check_prob(lambda1, false)?;
    check_prob(lambda2, true)?;
    if n == 0 {
        return Err(Error::config("the database has no granules"));
    }
    let e = c::<T>(std::f64::consts::E);
    let rho =
        T::from(u64::from(min_season) * u64::from(min_density)).unwrap() / (lambda2 * T::from(n).unwrap());
    let boundary_branch = rho <= e.recip();
    let raw = if boundary_branch {
        mu_at_domain_edge(lambda1, lambda2)
    } else {
        mu_interior(lambda1, lambda2, rho)
    };
    Ok(MuThreshold {
        raw,
        rho,
        boundary_branch,
    })
}
