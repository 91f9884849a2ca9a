//! Binary quadratic forms: reduced-form class numbers for negative
//! discriminants, cycle-counted narrow class numbers for positive ones,
//! and the fundamental-unit norm via the continued fraction of `sqrt(a)`.

use crate::arith;
use crate::{Error, Result};

/// `(a, b, c)` standing for `a x^2 + b x y + c y^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinaryForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl BinaryForm {
    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn is_primitive(&self) -> bool {
        arith::gcd(
            arith::gcd(self.a.unsigned_abs(), self.b.unsigned_abs()),
            self.c.unsigned_abs(),
        ) == 1
    }

    /// Reduction predicate for positive-definite forms:
    /// `|b| <= a <= c`, with `b >= 0` on the boundary.
    pub fn is_reduced_definite(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        if a <= 0 || b.abs() > a || a > c {
            return false;
        }
        if (b.abs() == a || a == c) && b < 0 {
            return false;
        }
        true
    }

    /// Reduction predicate for indefinite forms (`D > 0` nonsquare):
    /// `|sqrt(D) - 2|a|| < b < sqrt(D)`, in exact integer arithmetic.
    pub fn is_reduced_indefinite(&self) -> bool {
        let d = self.discriminant();
        if d <= 0 || self.b <= 0 || self.b * self.b >= d {
            return false;
        }
        let two_a = 2 * self.a.abs();
        // sqrt(D) < b + 2|a|
        if d >= (self.b + two_a) * (self.b + two_a) {
            return false;
        }
        // 2|a| - sqrt(D) < b
        if two_a > self.b && (two_a - self.b) * (two_a - self.b) >= d {
            return false;
        }
        true
    }
}

/// All reduced primitive positive-definite forms of discriminant `d < 0`.
pub fn reduced_forms(d: i64) -> Result<Vec<BinaryForm>> {
    if d >= 0 || d.rem_euclid(4) > 1 {
        return Err(Error::Domain(format!(
            "{d} is not a negative quadratic discriminant"
        )));
    }
    let mut out = Vec::new();
    let mut a = 1i64;
    while 3 * a * a <= -d {
        for b in -a..=a {
            if (b - d).rem_euclid(2) != 0 {
                continue;
            }
            let numerator = b * b - d;
            if numerator % (4 * a) != 0 {
                continue;
            }
            let c = numerator / (4 * a);
            let form = BinaryForm { a, b, c };
            if form.is_reduced_definite() && form.is_primitive() {
                out.push(form);
            }
        }
        a += 1;
    }
    out.sort();
    Ok(out)
}

/// Class number of the imaginary quadratic order of discriminant `d < 0`:
/// the number of reduced primitive forms.
pub fn class_number(d: i64) -> Result<u64> {
    Ok(reduced_forms(d)?.len() as u64)
}

/// All reduced primitive indefinite forms of discriminant `d > 0`
/// (nonsquare).
pub fn reduced_indefinite_forms(d: i64) -> Result<Vec<BinaryForm>> {
    if d <= 0 || d.rem_euclid(4) > 1 {
        return Err(Error::Domain(format!(
            "{d} is not a positive quadratic discriminant"
        )));
    }
    let root = arith::integer_kth_root(d as u64, 2) as i64;
    if root * root == d {
        return Err(Error::Domain(format!("{d} is a square")));
    }
    let mut out = Vec::new();
    for b in 1..=root {
        if (b - d).rem_euclid(2) != 0 {
            continue;
        }
        let n = (d - b * b) / 4; // a*c = -n < 0
        if n <= 0 {
            continue;
        }
        for a_abs in 1..=n {
            if n % a_abs != 0 {
                continue;
            }
            for a in [a_abs, -a_abs] {
                let c = -n / a;
                let form = BinaryForm { a, b, c };
                if form.is_reduced_indefinite() && form.is_primitive() {
                    out.push(form);
                }
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// One reduction step on a reduced indefinite form; iterating it walks
/// the cycle of the form's class.
fn rho(form: BinaryForm, d: i64, root: i64) -> BinaryForm {
    let c = form.c;
    let two_c = 2 * c.abs();
    // Unique b' = -b (mod 2|c|) inside (sqrt(D) - 2|c|, sqrt(D)).
    let b_next = root - (root + form.b).rem_euclid(two_c);
    let c_next = (b_next * b_next - d) / (4 * c);
    BinaryForm {
        a: c,
        b: b_next,
        c: c_next,
    }
}

/// Narrow class number: for `d < 0` the ordinary class number, for
/// `d > 0` the number of cycles of reduced indefinite forms under the
/// reduction operator.
pub fn narrow_class_number(d: i64) -> Result<u64> {
    if d < 0 {
        return class_number(d);
    }
    let forms = reduced_indefinite_forms(d)?;
    let root = arith::integer_kth_root(d as u64, 2) as i64;
    let mut remaining: std::collections::BTreeSet<BinaryForm> = forms.into_iter().collect();
    let mut cycles = 0u64;
    while let Some(&start) = remaining.iter().next() {
        cycles += 1;
        let mut current = start;
        loop {
            assert!(
                remaining.remove(&current),
                "rho left the reduced set at {current:?}"
            );
            current = rho(current, d, root);
            if current == start {
                break;
            }
        }
    }
    Ok(cycles)
}

/// Norm of the fundamental unit of `Q(sqrt(a))` for nonsquare `a >= 2`:
/// `-1` exactly when the continued fraction of `sqrt(a)` has odd period.
pub fn fundamental_unit_norm(a: u64) -> Result<i32> {
    let a0 = arith::integer_kth_root(a, 2);
    if a0 * a0 == a || a < 2 {
        return Err(Error::Domain(format!("{a} is not a nonsquare >= 2")));
    }
    let mut m = 0u64;
    let mut d = 1u64;
    let mut ai = a0;
    let mut period = 0u64;
    loop {
        m = d * ai - m;
        d = (a - m * m) / d;
        ai = (a0 + m) / d;
        period += 1;
        if ai == 2 * a0 && d == 1 {
            break;
        }
        if period > 4 * a {
            return Err(Error::Numerical(format!(
                "continued fraction of sqrt({a}) did not close"
            )));
        }
    }
    Ok(if period % 2 == 1 { -1 } else { 1 })
}
