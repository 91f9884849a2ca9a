//! Empirical tester for the large-sieve inequality over characters of
//! exact order `r`: evaluates the bilinear form on random and adversarial
//! coefficient vectors, compares against the four-regime coefficient
//! `Delta(Q, M)`, and checks the duality principle as an operator-norm
//! identity on the character-value matrix.
//!
//! The character family for modulus `q` follows the sum
//! `chi mod q, chi^r = chi_0, chi != chi_0` literally: all characters
//! induced from primitive exact-order-`r` characters whose (squarefree,
//! split-prime) conductor divides `q`. A primitive-only variant sits
//! behind a flag.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith;
use crate::chars::{self, OrderRCharacter, UnityValue};
use crate::{Error, Result};

const POWER_ITER_MAX: usize = 10_000;
const POWER_ITER_TOL: f64 = 1e-12;
const DENSE_DIM_LIMIT: usize = 2000;

/// Which of the four expressions attains the minimum in `Delta(Q, M)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaTerm {
    QSquaredPlusM,
    QThreeHalvesPlusRootQM,
    QTwoThirdsMPlusQFourThirds,
    MixedExponents,
}

impl DeltaTerm {
    pub fn label(&self) -> &'static str {
        match self {
            DeltaTerm::QSquaredPlusM => "Q^2+M",
            DeltaTerm::QThreeHalvesPlusRootQM => "Q^(3/2)+Q^(1/2)M",
            DeltaTerm::QTwoThirdsMPlusQFourThirds => "Q^(2/3)M+Q^(4/3)",
            DeltaTerm::MixedExponents => "Q+M^(5/3)Q^(-1/3)+Q^(1/3)M^(4/3)",
        }
    }
}

impl std::fmt::Display for DeltaTerm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// `(QM)^eps * min` of the four regime expressions, with the argmin label;
/// ties break in listed order.
pub fn delta_bound(q: f64, m: f64, eps: f64) -> (f64, DeltaTerm) {
    assert!(q >= 1.0 && m >= 1.0 && eps >= 0.0);
    let candidates = [
        (q * q + m, DeltaTerm::QSquaredPlusM),
        (q.powf(1.5) + q.sqrt() * m, DeltaTerm::QThreeHalvesPlusRootQM),
        (
            q.powf(2.0 / 3.0) * m + q.powf(4.0 / 3.0),
            DeltaTerm::QTwoThirdsMPlusQFourThirds,
        ),
        (
            q + m.powf(5.0 / 3.0) * q.powf(-1.0 / 3.0) + q.powf(1.0 / 3.0) * m.powf(4.0 / 3.0),
            DeltaTerm::MixedExponents,
        ),
    ];
    let mut best = candidates[0];
    for &cand in &candidates[1..] {
        if cand.0 < best.0 {
            best = cand;
        }
    }
    ((q * m).powf(eps) * best.0, best.1)
}

/// A character of modulus `q` induced from a primitive exact-order-`r`
/// character of conductor dividing `q`; vanishes on `gcd(n, q) > 1`.
#[derive(Debug, Clone)]
pub struct ModulusCharacter {
    modulus: u64,
    primitive: OrderRCharacter,
}

impl ModulusCharacter {
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn conductor(&self) -> u64 {
        self.primitive.modulus()
    }

    pub fn primitive(&self) -> &OrderRCharacter {
        &self.primitive
    }

    pub fn eval(&self, n: i64) -> UnityValue {
        if arith::gcd(n.unsigned_abs() % self.modulus, self.modulus) > 1 {
            UnityValue::zero(self.primitive.order())
        } else {
            self.primitive.eval(n)
        }
    }

    pub fn eval_complex(&self, n: i64) -> Complex64 {
        self.eval(n).to_complex()
    }
}

/// Every non-principal `chi mod q` with `chi^r = chi_0` for `q` in
/// `(q_lo, q_hi]`. With `primitive_only` set, only characters whose
/// conductor is `q` itself.
pub fn character_family(
    r: u64,
    q_lo: u64,
    q_hi: u64,
    primitive_only: bool,
) -> Result<Vec<ModulusCharacter>> {
    let mut by_conductor: HashMap<u64, Vec<OrderRCharacter>> = HashMap::new();
    let mut family = Vec::new();
    for q in q_lo + 1..=q_hi {
        for f in admissible_divisors(q, r) {
            if primitive_only && f != q {
                continue;
            }
            let primitives = match by_conductor.get(&f) {
                Some(cached) => cached.clone(),
                None => {
                    let fresh = chars::enumerate_order_r(f, r)?;
                    by_conductor.insert(f, fresh.clone());
                    fresh
                }
            };
            family.extend(primitives.into_iter().map(|primitive| ModulusCharacter {
                modulus: q,
                primitive,
            }));
        }
    }
    Ok(family)
}

/// Divisors of `q` that are admissible conductors: squarefree products of
/// primes `= 1 (mod r)` dividing `q`, excluding 1.
fn admissible_divisors(q: u64, r: u64) -> Vec<u64> {
    let split: Vec<u64> = arith::factorize(q)
        .into_iter()
        .filter(|&(p, _)| p % r == 1)
        .map(|(p, _)| p)
        .collect();
    let mut divisors = vec![1u64];
    for &p in &split {
        let extend: Vec<u64> = divisors.iter().map(|&d| d * p).collect();
        divisors.extend(extend);
    }
    divisors.retain(|&d| d > 1);
    divisors.sort_unstable();
    divisors
}

/// Coefficient vector supported on squarefree `m in (M, 2M]` coprime
/// to `r`, for the bilinear form of the sieve.
#[derive(Debug, Clone)]
pub struct LargeSieveInstance {
    pub r: u64,
    pub q: f64,
    pub m: f64,
    m_lo: u64,
    coeffs: Vec<Complex64>,
}

impl LargeSieveInstance {
    fn empty(r: u64, q: f64, m: f64) -> Self {
        assert!(q >= 1.0 && m >= 1.0);
        let m_lo = m.floor() as u64 + 1;
        let m_hi = (2.0 * m).floor() as u64;
        let len = m_hi.saturating_sub(m_lo).saturating_add(1) as usize;
        LargeSieveInstance {
            r,
            q,
            m,
            m_lo,
            coeffs: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    fn support(&self) -> impl Iterator<Item = u64> + '_ {
        let r = self.r;
        (self.m_lo..self.m_lo + self.coeffs.len() as u64)
            .filter(move |&m| arith::is_squarefree(m) && arith::gcd(m, r) == 1)
    }

    pub fn set(&mut self, m: u64, value: Complex64) {
        assert!(
            arith::is_squarefree(m) && arith::gcd(m, self.r) == 1,
            "coefficients live on squarefree m coprime to r"
        );
        self.coeffs[(m - self.m_lo) as usize] = value;
    }

    pub fn coefficient(&self, m: u64) -> Complex64 {
        self.coeffs
            .get((m.wrapping_sub(self.m_lo)) as usize)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn rotate_phase(&mut self, theta: f64) {
        let rot = Complex64::from_polar(1.0, theta);
        for c in &mut self.coeffs {
            *c *= rot;
        }
    }

    pub fn rademacher(r: u64, q: f64, m: f64, rng: &mut impl Rng) -> Self {
        let mut inst = Self::empty(r, q, m);
        for m in inst.support().collect::<Vec<_>>() {
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            inst.set(m, Complex64::new(sign, 0.0));
        }
        inst
    }

    pub fn unit_phase(r: u64, q: f64, m: f64, rng: &mut impl Rng) -> Self {
        let mut inst = Self::empty(r, q, m);
        for m in inst.support().collect::<Vec<_>>() {
            let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            inst.set(m, Complex64::from_polar(1.0, theta));
        }
        inst
    }

    pub fn all_ones(r: u64, q: f64, m: f64) -> Self {
        let mut inst = Self::empty(r, q, m);
        for m in inst.support().collect::<Vec<_>>() {
            inst.set(m, Complex64::new(1.0, 0.0));
        }
        inst
    }

    /// Adversary aligned with one character: `a_m = conj(chi(m))`.
    pub fn aligned(r: u64, q: f64, m: f64, chi: &ModulusCharacter) -> Self {
        let mut inst = Self::empty(r, q, m);
        for m in inst.support().collect::<Vec<_>>() {
            inst.set(m, chi.eval_complex(m as i64).conj());
        }
        inst
    }
}

/// Left-hand side of the sieve inequality:
/// `sum_{Q < q <= 2Q} sum_chi |sum_m a_m chi(m)|^2`.
pub fn ls_lhs(inst: &LargeSieveInstance, primitive_only: bool) -> Result<f64> {
    let family = character_family(
        inst.r,
        inst.q.floor() as u64,
        (2.0 * inst.q).floor() as u64,
        primitive_only,
    )?;
    Ok(ls_lhs_with_family(inst, &family))
}

fn ls_lhs_with_family(inst: &LargeSieveInstance, family: &[ModulusCharacter]) -> f64 {
    family
        .iter()
        .map(|chi| {
            let inner: Complex64 = inst
                .support()
                .map(|m| inst.coefficient(m) * chi.eval_complex(m as i64))
                .sum();
            inner.norm_sqr()
        })
        .sum()
}

/// Result of one `(Q, M)` cell of a ratio sweep: the worst instance found.
#[derive(Debug, Clone)]
pub struct SieveReport {
    pub r: u64,
    pub q: f64,
    pub m: f64,
    pub lhs: f64,
    pub norm_sq: f64,
    pub delta: f64,
    pub ratio: f64,
    pub active_term: DeltaTerm,
    pub char_count: usize,
    pub seed: u64,
}

/// Sweep the `(Q, M)` grid: `trials` random coefficient vectors
/// (Rademacher and uniform-phase, alternating) plus the all-ones and
/// aligned adversaries per cell, reporting the maximal ratio
/// `lhs / (Delta ||a||^2)`.
pub fn ratio_sweep(
    r: u64,
    q_list: &[f64],
    m_list: &[f64],
    trials: u32,
    seed: u64,
    primitive_only: bool,
) -> Result<Vec<SieveReport>> {
    let mut reports = Vec::with_capacity(q_list.len() * m_list.len());
    for &q in q_list {
        for &m in m_list {
            reports.push(sweep_cell(r, q, m, trials, seed, primitive_only)?);
        }
    }
    Ok(reports)
}

fn cell_rng(seed: u64, q: f64, m: f64) -> ChaCha8Rng {
    // Cell-local stream: reordering the grid must not change any cell.
    let mut mix = seed ^ 0x9e37_79b9_7f4a_7c15;
    for bits in [q.to_bits(), m.to_bits()] {
        mix ^= bits;
        mix = mix.wrapping_mul(0xff51_afd7_ed55_8ccd);
        mix ^= mix >> 33;
    }
    ChaCha8Rng::seed_from_u64(mix)
}

fn sweep_cell(
    r: u64,
    q: f64,
    m: f64,
    trials: u32,
    seed: u64,
    primitive_only: bool,
) -> Result<SieveReport> {
    let family = character_family(r, q.floor() as u64, (2.0 * q).floor() as u64, primitive_only)?;
    let (delta, active_term) = delta_bound(q, m, 0.0);
    let mut rng = cell_rng(seed, q, m);

    let mut instances: Vec<LargeSieveInstance> = Vec::with_capacity(trials as usize + 2);
    for t in 0..trials {
        instances.push(if t % 2 == 0 {
            LargeSieveInstance::rademacher(r, q, m, &mut rng)
        } else {
            LargeSieveInstance::unit_phase(r, q, m, &mut rng)
        });
    }
    instances.push(LargeSieveInstance::all_ones(r, q, m));
    // Character-aligned adversaries: all of them while the family is
    // small (keeps the cell maximum deterministic), a sample beyond that.
    const ALIGN_ALL_LIMIT: usize = 64;
    if family.len() <= ALIGN_ALL_LIMIT {
        for chi in &family {
            instances.push(LargeSieveInstance::aligned(r, q, m, chi));
        }
    } else if !family.is_empty() {
        for _ in 0..ALIGN_ALL_LIMIT {
            let chi = &family[rng.gen_range(0..family.len())];
            instances.push(LargeSieveInstance::aligned(r, q, m, chi));
        }
    }

    let mut best = SieveReport {
        r,
        q,
        m,
        lhs: 0.0,
        norm_sq: 0.0,
        delta,
        ratio: 0.0,
        active_term,
        char_count: family.len(),
        seed,
    };
    for inst in &instances {
        let norm_sq = inst.norm_sq();
        if norm_sq == 0.0 {
            continue;
        }
        let lhs = ls_lhs_with_family(inst, &family);
        let ratio = lhs / (delta * norm_sq);
        if ratio > best.ratio {
            best.lhs = lhs;
            best.norm_sq = norm_sq;
            best.ratio = ratio;
        }
    }
    Ok(best)
}

/// Relative gap `|sigma_max(T) - sigma_max(T*)| / sigma_max(T)` between
/// the two power-iteration estimates of the largest singular value of the
/// character-value matrix (rows: family characters for `q in (Q, 2Q]`;
/// columns: squarefree `m in (M, 2M]`). Zero for an empty matrix.
pub fn duality_gap(r: u64, q: f64, m: f64, primitive_only: bool) -> Result<f64> {
    let family = character_family(r, q.floor() as u64, (2.0 * q).floor() as u64, primitive_only)?;
    let m_lo = m.floor() as u64 + 1;
    let m_hi = (2.0 * m).floor() as u64;
    let columns: Vec<u64> = (m_lo..=m_hi).filter(|&n| arith::is_squarefree(n)).collect();

    if family.is_empty() || columns.is_empty() {
        return Ok(0.0);
    }
    if family.len() > DENSE_DIM_LIMIT || columns.len() > DENSE_DIM_LIMIT {
        return Err(Error::Precondition(format!(
            "dense duality matrix {}x{} exceeds the {DENSE_DIM_LIMIT} limit",
            family.len(),
            columns.len()
        )));
    }

    // Row-major dense matrix t[chi][m] = chi(m).
    let rows = family.len();
    let cols = columns.len();
    let mut matrix = vec![Complex64::new(0.0, 0.0); rows * cols];
    for (i, chi) in family.iter().enumerate() {
        for (j, &m) in columns.iter().enumerate() {
            matrix[i * cols + j] = chi.eval_complex(m as i64);
        }
    }

    let sigma_t = largest_singular_value(&matrix, rows, cols, false)?;
    let sigma_t_star = largest_singular_value(&matrix, rows, cols, true)?;
    if sigma_t == 0.0 {
        return Ok(0.0);
    }
    Ok((sigma_t - sigma_t_star).abs() / sigma_t)
}

fn apply(matrix: &[Complex64], rows: usize, cols: usize, v: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); rows];
    for (i, slot) in out.iter_mut().enumerate() {
        let row = &matrix[i * cols..(i + 1) * cols];
        *slot = row.iter().zip(v).map(|(a, b)| a * b).sum();
    }
    out
}

fn apply_adjoint(matrix: &[Complex64], rows: usize, cols: usize, v: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); cols];
    for i in 0..rows {
        let row = &matrix[i * cols..(i + 1) * cols];
        let vi = v[i];
        for (j, slot) in out.iter_mut().enumerate() {
            *slot += row[j].conj() * vi;
        }
    }
    out
}

/// Power iteration on `T*T` (or `T T*` when `adjoint` is set) to relative
/// tolerance, returning `sigma_max`.
fn largest_singular_value(
    matrix: &[Complex64],
    rows: usize,
    cols: usize,
    adjoint: bool,
) -> Result<f64> {
    let dim = if adjoint { rows } else { cols };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_d0a1);
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    normalize(&mut v);

    let mut lambda_prev = f64::INFINITY;
    for _ in 0..POWER_ITER_MAX {
        let w = if adjoint {
            // T T* v
            let u = apply_adjoint(matrix, rows, cols, &v);
            apply(matrix, rows, cols, &u)
        } else {
            // T* T v
            let u = apply(matrix, rows, cols, &v);
            apply_adjoint(matrix, rows, cols, &u)
        };
        // Rayleigh quotient of the PSD Gram operator at unit v.
        let lambda: f64 = w.iter().zip(&v).map(|(a, b)| (a * b.conj()).re).sum();
        if lambda <= 0.0 {
            return Ok(0.0);
        }
        let mut next = w;
        normalize(&mut next);
        v = next;
        if (lambda - lambda_prev).abs() <= POWER_ITER_TOL * lambda.max(1e-300) {
            return Ok(lambda.sqrt());
        }
        lambda_prev = lambda;
    }
    Err(Error::Numerical(format!(
        "power iteration did not stabilise in {POWER_ITER_MAX} steps"
    )))
}

fn normalize(v: &mut [Complex64]) {
    let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for c in v.iter_mut() {
            *c /= norm;
        }
    }
}
