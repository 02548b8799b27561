//! Exact arithmetic in number fields Q[x]/(m(x)) with rational coefficients,
//! plus truncated power-series operations over such a field.
//!
//! Two fields cover what the rest of the crate needs: cyclotomic fields
//! Q(zeta_q) for exact root-of-unity multipliers, and real quadratic fields
//! Q(sqrt(d)) for exact surd multipliers.

use std::rc::Rc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// A monic minimal polynomial defining the field Q[x]/(m(x)).
#[derive(Debug, PartialEq, Eq)]
pub struct FieldSpec {
    /// Coefficients of m(x), lowest first, leading coefficient 1.
    pub minpoly: Vec<BigRational>,
}

impl FieldSpec {
    pub fn degree(&self) -> usize {
        self.minpoly.len() - 1
    }

    /// The q-th cyclotomic field for prime q: m(x) = 1 + x + ... + x^(q-1).
    pub fn cyclotomic_prime(q: usize) -> Rc<FieldSpec> {
        let one = BigRational::one();
        Rc::new(FieldSpec { minpoly: vec![one; q] })
    }

    /// Q(sqrt(d)): m(x) = x^2 - d.
    pub fn quadratic(d: i64) -> Rc<FieldSpec> {
        Rc::new(FieldSpec {
            minpoly: vec![
                BigRational::from_integer(BigInt::from(-d)),
                BigRational::zero(),
                BigRational::one(),
            ],
        })
    }
}

/// An element of Q[x]/(m(x)): coordinates in the power basis 1, x, ..., x^(deg-1).
#[derive(Clone, Debug)]
pub struct FieldElem {
    field: Rc<FieldSpec>,
    coords: Vec<BigRational>,
}

impl FieldElem {
    pub fn zero(field: &Rc<FieldSpec>) -> Self {
        FieldElem { field: field.clone(), coords: vec![BigRational::zero(); field.degree()] }
    }

    pub fn one(field: &Rc<FieldSpec>) -> Self {
        let mut e = FieldElem::zero(field);
        e.coords[0] = BigRational::one();
        e
    }

    pub fn from_rational(field: &Rc<FieldSpec>, r: BigRational) -> Self {
        let mut e = FieldElem::zero(field);
        e.coords[0] = r;
        e
    }

    pub fn from_i64(field: &Rc<FieldSpec>, n: i64) -> Self {
        FieldElem::from_rational(field, BigRational::from_integer(BigInt::from(n)))
    }

    /// The generator x (e.g. zeta_q or sqrt(d)).
    pub fn generator(field: &Rc<FieldSpec>) -> Self {
        let mut e = FieldElem::zero(field);
        if field.degree() >= 2 {
            e.coords[1] = BigRational::one();
        } else {
            e.coords[0] = BigRational::one();
        }
        e
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &FieldElem) -> FieldElem {
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a + b)
            .collect();
        FieldElem { field: self.field.clone(), coords }
    }

    pub fn sub(&self, other: &FieldElem) -> FieldElem {
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a - b)
            .collect();
        FieldElem { field: self.field.clone(), coords }
    }

    pub fn neg(&self) -> FieldElem {
        let coords = self.coords.iter().map(|a| -a).collect();
        FieldElem { field: self.field.clone(), coords }
    }

    pub fn mul(&self, other: &FieldElem) -> FieldElem {
        let deg = self.field.degree();
        let mut raw = vec![BigRational::zero(); 2 * deg];
        for (i, a) in self.coords.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coords.iter().enumerate() {
                if !b.is_zero() {
                    raw[i + j] = &raw[i + j] + a * b;
                }
            }
        }
        // reduce mod m(x): x^deg = -(m_0 + m_1 x + ... + m_{deg-1} x^{deg-1})
        for k in (deg..2 * deg).rev() {
            if raw[k].is_zero() {
                continue;
            }
            let lead = raw[k].clone();
            raw[k] = BigRational::zero();
            for j in 0..deg {
                let m = &self.field.minpoly[j];
                if !m.is_zero() {
                    raw[k - deg + j] = &raw[k - deg + j] - &lead * m;
                }
            }
        }
        raw.truncate(deg);
        FieldElem { field: self.field.clone(), coords: raw }
    }

    pub fn pow(&self, mut e: u64) -> FieldElem {
        let mut base = self.clone();
        let mut acc = FieldElem::one(&self.field);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via the extended Euclidean algorithm on
    /// polynomials over Q. Panics on zero.
    pub fn inv(&self) -> FieldElem {
        assert!(!self.is_zero(), "inverse of zero field element");
        // extended gcd of a(x) (self) and m(x)
        let mut r0 = self.field.minpoly.clone();
        let mut r1 = trim(self.coords.clone());
        let mut t0: Vec<BigRational> = vec![];
        let mut t1 = vec![BigRational::one()];
        while !r1.is_empty() {
            let (q, r) = poly_divmod(&r0, &r1);
            let t2 = poly_sub(&t0, &poly_mul(&q, &t1));
            r0 = r1;
            r1 = r;
            t0 = t1;
            t1 = t2;
        }
        // r0 is the gcd: a nonzero constant since m is irreducible
        assert_eq!(r0.len(), 1, "minimal polynomial is not irreducible over Q");
        let c = r0[0].clone();
        let mut coords = vec![BigRational::zero(); self.field.degree()];
        for (i, t) in t0.iter().enumerate() {
            if i < coords.len() {
                coords[i] = t / &c;
            }
        }
        FieldElem { field: self.field.clone(), coords }
    }

    pub fn div(&self, other: &FieldElem) -> FieldElem {
        self.mul(&other.inv())
    }

    /// Numerical embedding given a complex value for the generator.
    pub fn embed(&self, generator: num_complex::Complex64) -> num_complex::Complex64 {
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for c in self.coords.iter().rev() {
            acc = acc * generator + num_complex::Complex64::new(rational_to_f64(c), 0.0);
        }
        acc
    }
}

impl PartialEq for FieldElem {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.coords == other.coords
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    // scale to keep the integer division representable
    let num = r.numer();
    let den = r.denom();
    let nb = num.bits() as i64;
    let db = den.bits() as i64;
    let shift = (nb.max(db) - 900).max(0) as u64;
    let n = num >> shift;
    let d = den >> shift;
    let df = bigint_to_f64(&d);
    if df == 0.0 {
        return 0.0;
    }
    bigint_to_f64(&n) / df
}

fn bigint_to_f64(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 52 {
        return n.to_string().parse::<f64>().unwrap_or(0.0);
    }
    let shift = bits - 52;
    let top = n >> shift;
    let top_f = top.to_string().parse::<f64>().unwrap_or(0.0);
    top_f * 2f64.powi(shift as i32)
}

fn trim(mut v: Vec<BigRational>) -> Vec<BigRational> {
    while v.last().map(|c| c.is_zero()).unwrap_or(false) {
        v.pop();
    }
    v
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] = &out[i + j] + x * y;
            }
        }
    }
    trim(out)
}

fn poly_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len().max(b.len());
    let mut out = vec![BigRational::zero(); n];
    for (i, x) in a.iter().enumerate() {
        out[i] = x.clone();
    }
    for (i, y) in b.iter().enumerate() {
        out[i] = &out[i] - y;
    }
    trim(out)
}

fn poly_divmod(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let b = trim(b.to_vec());
    assert!(!b.is_empty(), "division by zero polynomial");
    let mut rem = trim(a.to_vec());
    if rem.len() < b.len() {
        return (vec![], rem);
    }
    let mut quot = vec![BigRational::zero(); rem.len() - b.len() + 1];
    let lead = b.last().unwrap().clone();
    while rem.len() >= b.len() {
        let k = rem.len() - b.len();
        let c = rem.last().unwrap() / &lead;
        quot[k] = c.clone();
        for (j, bc) in b.iter().enumerate() {
            rem[k + j] = &rem[k + j] - &c * bc;
        }
        rem = trim(rem);
        if rem.is_empty() {
            break;
        }
        if rem.len() < b.len() {
            break;
        }
    }
    (trim(quot), rem)
}

/// Truncated power series over a number field: c_1 z + c_2 z^2 + ... + c_N z^N
/// (no constant term; germs at a fixed point).
#[derive(Clone, Debug)]
pub struct ExactSeries {
    field: Rc<FieldSpec>,
    /// coeffs[k] is the coefficient of z^(k+1).
    pub coeffs: Vec<FieldElem>,
}

impl ExactSeries {
    pub fn new(field: &Rc<FieldSpec>, coeffs: Vec<FieldElem>) -> Self {
        ExactSeries { field: field.clone(), coeffs }
    }

    /// The identity series z, truncated at order n.
    pub fn identity(field: &Rc<FieldSpec>, n: usize) -> Self {
        let mut coeffs = vec![FieldElem::zero(field); n];
        coeffs[0] = FieldElem::one(field);
        ExactSeries { field: field.clone(), coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, power: usize) -> FieldElem {
        // power >= 1
        self.coeffs
            .get(power - 1)
            .cloned()
            .unwrap_or_else(|| FieldElem::zero(&self.field))
    }

    /// Composition self(other(z)), truncated to the shorter order.
    pub fn compose(&self, other: &ExactSeries) -> ExactSeries {
        let n = self.order().min(other.order());
        // Horner over series: acc = (acc + c_k) * other, from high k down
        let mut acc: Vec<FieldElem> = vec![FieldElem::zero(&self.field); n];
        for k in (0..self.coeffs.len().min(n)).rev() {
            // acc = acc * other
            acc = series_mul(&self.field, &acc, &other.coeffs, n);
            // acc += c_{k+1} * other  (since the monomial z^{k+1} contributes c*other^{k+1})
            for (i, oc) in other.coeffs.iter().enumerate().take(n) {
                acc[i] = acc[i].add(&self.coeffs[k].mul(oc));
            }
        }
        ExactSeries { field: self.field.clone(), coeffs: acc }
    }

    pub fn sub(&self, other: &ExactSeries) -> ExactSeries {
        let n = self.order().min(other.order());
        let coeffs = (0..n).map(|i| self.coeffs[i].sub(&other.coeffs[i])).collect();
        ExactSeries { field: self.field.clone(), coeffs }
    }

    /// Scale the argument: returns self(c z).
    pub fn scale_argument(&self, c: &FieldElem) -> ExactSeries {
        let mut pow = c.clone();
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for co in &self.coeffs {
            coeffs.push(co.mul(&pow));
            pow = pow.mul(c);
        }
        ExactSeries { field: self.field.clone(), coeffs }
    }
}

fn series_mul(
    field: &Rc<FieldSpec>,
    a: &[FieldElem],
    b: &[FieldElem],
    n: usize,
) -> Vec<FieldElem> {
    // both a and b have no constant term; product coefficient of z^k is
    // sum over i+j=k of a_i b_j with i,j >= 1
    let mut out = vec![FieldElem::zero(field); n];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            let k = i + j + 1; // power (i+1)+(j+1)-1 indexes out[k]
            if k >= n {
                break;
            }
            out[k] = out[k].add(&ai.mul(bj));
        }
    }
    out
}

/// Exact germ iteration: the q-fold composition of a germ with itself,
/// truncated at the germ's order.
pub fn iterate_series(germ: &ExactSeries, q: usize) -> ExactSeries {
    let mut acc = germ.clone();
    for _ in 1..q {
        acc = germ.compose(&acc);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_field_arithmetic() {
        // golden ratio surd: x = sqrt(5); ((x-1)/2)^2 = (6-2x)/4 = (3-x)/2
        let f = FieldSpec::quadratic(5);
        let x = FieldElem::generator(&f);
        let half = FieldElem::from_rational(&f, BigRational::new(BigInt::from(1), BigInt::from(2)));
        let phi = x.sub(&FieldElem::one(&f)).mul(&half); // (sqrt5 - 1)/2
        let sq = phi.mul(&phi);
        // phi^2 = 1 - phi  (golden identity for (sqrt5-1)/2: x^2 + x - 1 = 0)
        let expect = FieldElem::one(&f).sub(&phi);
        assert_eq!(sq, expect);
    }

    #[test]
    fn field_inverse() {
        let f = FieldSpec::quadratic(2);
        let x = FieldElem::generator(&f); // sqrt(2)
        let a = x.add(&FieldElem::one(&f)); // 1 + sqrt2
        let inv = a.inv();
        assert_eq!(a.mul(&inv), FieldElem::one(&f));
        // 1/(1+sqrt2) = sqrt2 - 1
        let expect = x.sub(&FieldElem::one(&f));
        assert_eq!(inv, expect);
    }

    #[test]
    fn cyclotomic_root_of_unity() {
        let f = FieldSpec::cyclotomic_prime(7);
        let zeta = FieldElem::generator(&f);
        assert_eq!(zeta.pow(7), FieldElem::one(&f));
        assert!(!zeta.pow(3).is_zero());
        assert_ne!(zeta.pow(3), FieldElem::one(&f));
    }

    #[test]
    fn series_composition_square() {
        // g(z) = z + z^2 over Q; g(g(z)) = z + 2z^2 + 2z^3 + z^4
        let f = FieldSpec::quadratic(2); // any field containing Q
        let one = FieldElem::one(&f);
        let mut coeffs = vec![FieldElem::zero(&f); 4];
        coeffs[0] = one.clone();
        coeffs[1] = one.clone();
        let g = ExactSeries::new(&f, coeffs);
        let gg = g.compose(&g);
        assert_eq!(gg.coeff(1), one);
        assert_eq!(gg.coeff(2), FieldElem::from_i64(&f, 2));
        assert_eq!(gg.coeff(3), FieldElem::from_i64(&f, 2));
        assert_eq!(gg.coeff(4), FieldElem::from_i64(&f, 1));
    }

    #[test]
    fn iterate_expansion_coefficient_is_k_times_a() {
        // f = z + a z^2 with a = 3: k-th iterate has z^2 coefficient k*a
        let f = FieldSpec::quadratic(2);
        let mut coeffs = vec![FieldElem::zero(&f); 3];
        coeffs[0] = FieldElem::one(&f);
        coeffs[1] = FieldElem::from_i64(&f, 3);
        let g = ExactSeries::new(&f, coeffs);
        for k in 1..=5 {
            let it = iterate_series(&g, k);
            assert_eq!(it.coeff(2), FieldElem::from_i64(&f, 3 * k as i64));
        }
    }

    #[test]
    fn seventh_iterate_multiplicity() {
        // f(z) = zeta^3 z + z^2 in Q(zeta_7): the 7th iterate is
        // z + a_8 z^8 + ... with a_2..a_7 exactly zero.
        let f = FieldSpec::cyclotomic_prime(7);
        let lambda = FieldElem::generator(&f).pow(3);
        let mut coeffs = vec![FieldElem::zero(&f); 9];
        coeffs[0] = lambda;
        coeffs[1] = FieldElem::one(&f);
        let g = ExactSeries::new(&f, coeffs);
        let it7 = iterate_series(&g, 7);
        assert_eq!(it7.coeff(1), FieldElem::one(&f));
        for k in 2..=7 {
            assert!(it7.coeff(k).is_zero(), "coefficient {k} should vanish");
        }
        assert!(!it7.coeff(8).is_zero());
    }
}
