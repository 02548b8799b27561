//! Complex polynomials (dense, lowest degree first) and simultaneous root finding.

use num_complex::Complex64;

use crate::error::{DynError, Result};

const TRIM_EPS: f64 = 0.0; // exact zeros only; callers trim numerically themselves

#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    /// Coefficients, lowest degree first. Invariant: empty or nonzero leading coefficient.
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while let Some(c) = coeffs.last() {
            if c.norm() <= TRIM_EPS {
                coeffs.pop();
            } else {
                break;
            }
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![] }
    }

    pub fn one() -> Self {
        Polynomial::constant(Complex64::new(1.0, 0.0))
    }

    pub fn constant(c: Complex64) -> Self {
        Polynomial::new(vec![c])
    }

    /// The monomial z.
    pub fn z() -> Self {
        Polynomial::new(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)])
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Polynomial::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; 0 for constants and for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() <= 1 {
            return Polynomial::zero();
        }
        Polynomial::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, &c)| c * (i as f64 + 1.0))
                .collect(),
        )
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (i, &c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, &c) in other.coeffs.iter().enumerate() {
            out[i] += c;
        }
        Polynomial::new(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }

    /// Monic-times-leading polynomial with the given roots (with repetition).
    pub fn from_roots(leading: Complex64, roots: &[Complex64]) -> Polynomial {
        let mut out = Polynomial::constant(leading);
        for &r in roots {
            out = out.mul(&Polynomial::new(vec![-r, Complex64::new(1.0, 0.0)]));
        }
        out
    }

    pub fn pow(&self, k: usize) -> Polynomial {
        let mut out = Polynomial::one();
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Composition self(g(z)) by Horner on polynomials.
    pub fn compose(&self, g: &Polynomial) -> Polynomial {
        let mut acc = Polynomial::zero();
        for &c in self.coeffs.iter().rev() {
            acc = acc.mul(g).add(&Polynomial::constant(c));
        }
        acc
    }

    /// Taylor shift: returns p(z + c) as a polynomial in z.
    pub fn shift(&self, c: Complex64) -> Polynomial {
        // Repeated synthetic division by (z - c); remainders are the Taylor coefficients.
        if self.is_zero() {
            return Polynomial::zero();
        }
        let n = self.coeffs.len();
        let mut work = self.coeffs.clone();
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            // divide work (degree m) by (z - c): quotient q, remainder r
            let m = work.len();
            let mut q = vec![Complex64::new(0.0, 0.0); m.saturating_sub(1)];
            let mut carry = Complex64::new(0.0, 0.0);
            for i in (0..m).rev() {
                let v = work[i] + carry * c;
                if i == 0 {
                    out.push(v);
                } else {
                    q[i - 1] = v;
                    carry = v;
                }
            }
            work = q;
            if work.is_empty() {
                break;
            }
        }
        Polynomial::new(out)
    }

    /// Reversal to fixed length m: z^m * p(1/z), padding with zeros up to degree m.
    pub fn reverse_to(&self, m: usize) -> Polynomial {
        let mut out = vec![Complex64::new(0.0, 0.0); m + 1];
        for (i, &c) in self.coeffs.iter().enumerate() {
            if i <= m {
                out[m - i] = c;
            }
        }
        Polynomial::new(out)
    }

    /// Largest coefficient magnitude; 0 for the zero polynomial.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// All complex roots with multiplicity clustering.
    pub fn roots(&self) -> Result<Vec<RootCluster>> {
        let raw = aberth_roots(&self.coeffs)?;
        Ok(cluster_roots(&raw, self))
    }
}

/// A root together with its numerically detected multiplicity.
#[derive(Clone, Copy, Debug)]
pub struct RootCluster {
    pub value: Complex64,
    pub multiplicity: usize,
}

/// Aberth-Ehrlich simultaneous iteration, with a Durand-Kerner pass as a
/// fallback when it stalls. Coefficients lowest-first.
pub fn aberth_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut c = coeffs.to_vec();
    while let Some(last) = c.last() {
        if last.norm() == 0.0 {
            c.pop();
        } else {
            break;
        }
    }
    if c.len() <= 1 {
        return Ok(vec![]);
    }
    // strip roots at zero so initial guesses stay well scaled
    let mut zeros_at_origin = 0usize;
    while c[0].norm() == 0.0 {
        c.remove(0);
        zeros_at_origin += 1;
    }
    let n = c.len() - 1;
    let mut roots = if n > 0 {
        run_aberth(&c).or_else(|_| run_durand_kerner(&c))?
    } else {
        vec![]
    };
    for _ in 0..zeros_at_origin {
        roots.push(Complex64::new(0.0, 0.0));
    }
    Ok(roots)
}

fn eval_with_deriv(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

fn initial_guesses(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let lead = c[n].norm();
    // Cauchy-style radius bound
    let r = 1.0
        + c[..n]
            .iter()
            .map(|a| (a.norm() / lead).powf(1.0))
            .fold(0.0, f64::max);
    let r = r.min(
        2.0 * c[..n]
            .iter()
            .enumerate()
            .map(|(i, a)| (a.norm() / lead).powf(1.0 / (n - i) as f64))
            .fold(0.0, f64::max)
            .max(0.5),
    );
    (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4;
            Complex64::from_polar(r * 0.7, theta)
        })
        .collect()
}

fn run_aberth(c: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = c.len() - 1;
    let mut z = initial_guesses(c);
    let max_iter = 400 + 20 * n;
    let tol = 1e-13;
    for iter in 0..max_iter {
        let mut max_step: f64 = 0.0;
        let old = z.clone();
        for i in 0..n {
            let (p, dp) = eval_with_deriv(c, old[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let newton = if dp.norm() > 0.0 { p / dp } else { Complex64::new(tol, 0.0) };
            let mut sum = Complex64::new(0.0, 0.0);
            for (j, &zj) in old.iter().enumerate() {
                if j != i {
                    let d = old[i] - zj;
                    if d.norm() > 1e-300 {
                        sum += 1.0 / d;
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * sum;
            let step = if denom.norm() > 1e-300 { newton / denom } else { newton };
            z[i] = old[i] - step;
            let rel = step.norm() / z[i].norm().max(1.0);
            max_step = max_step.max(rel);
        }
        if max_step < tol {
            return Ok(z);
        }
        // multiple roots: accept stagnation once residuals are tiny
        if iter > 60 && max_step < 1e-7 {
            let scale = c.iter().map(|a| a.norm()).fold(0.0, f64::max);
            let worst = z
                .iter()
                .map(|&zi| eval_with_deriv(c, zi).0.norm())
                .fold(0.0, f64::max);
            if worst < 1e-11 * scale * (1.0 + z.iter().map(|v| v.norm()).fold(0.0, f64::max)).powi(n.min(12) as i32) {
                return Ok(z);
            }
        }
    }
    // final residual check: clustered multiple roots stall the step criterion
    let scale = c.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let worst = z.iter().map(|&zi| eval_with_deriv(c, zi).0.norm()).fold(0.0, f64::max);
    if worst < 1e-9 * scale.max(1.0) {
        return Ok(z);
    }
    Err(DynError::RootFinder { iterations: max_iter, residual: worst })
}

fn run_durand_kerner(c: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = c.len() - 1;
    let lead = c[n];
    let monic: Vec<Complex64> = c.iter().map(|&a| a / lead).collect();
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(0.9, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.7))
        .collect();
    let max_iter = 2000;
    for _ in 0..max_iter {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let (p, _) = eval_with_deriv(&monic, z[i]);
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() < 1e-300 {
                continue;
            }
            let step = p / denom;
            z[i] -= step;
            max_step = max_step.max(step.norm() / z[i].norm().max(1.0));
        }
        if max_step < 1e-13 {
            return Ok(z);
        }
    }
    let worst = z.iter().map(|&zi| eval_with_deriv(&monic, zi).0.norm()).fold(0.0, f64::max);
    if worst < 1e-8 {
        return Ok(z);
    }
    Err(DynError::RootFinder { iterations: max_iter, residual: worst })
}

/// Group numerically coincident roots into clusters with a multiplicity count.
/// The cluster centroid is a better root estimate than any single member.
fn cluster_roots(raw: &[Complex64], p: &Polynomial) -> Vec<RootCluster> {
    let scale = raw.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let eps = 1e-6 * scale;
    let mut used = vec![false; raw.len()];
    let mut out = Vec::new();
    for i in 0..raw.len() {
        if used[i] {
            continue;
        }
        let mut members = vec![raw[i]];
        used[i] = true;
        for j in (i + 1)..raw.len() {
            if !used[j] && (raw[j] - raw[i]).norm() < eps {
                members.push(raw[j]);
                used[j] = true;
            }
        }
        let mut centroid = members.iter().sum::<Complex64>() / members.len() as f64;
        // polish simple roots by Newton
        if members.len() == 1 {
            for _ in 0..3 {
                let (v, dv) = eval_with_deriv(p.coeffs(), centroid);
                if dv.norm() > 1e-300 {
                    centroid -= v / dv;
                }
            }
        }
        out.push(RootCluster { value: centroid, multiplicity: members.len() });
    }
    out
}
