//! Quick invariant battery for `kummerlab selftest`: a compressed pass
//! over the identities the full test suite checks at scale. Any failure
//! is an invariant violation (exit code 3).

use kummerlab::{arith, chars, forms, residue, sieve_lab, singular, varieties};

type Check = (&'static str, fn() -> Result<(), String>);

fn character_identity() -> Result<(), String> {
    for &r in &[3u64, 5, 7] {
        for p in (3..=120u64).filter(|&p| arith::is_prime(p) && p % r == 1) {
            for k in 0..p as i64 {
                let direct = singular::count_roots(k, p, r).count;
                let via = singular::count_roots_via_characters(k, p, r)
                    .map_err(|e| e.to_string())?;
                if direct != via {
                    return Err(format!("k={k} p={p} r={r}: {direct} != {via}"));
                }
            }
        }
    }
    Ok(())
}

fn symbol_correspondence() -> Result<(), String> {
    for &r in &[3u64, 5] {
        for p in (3..=60u64).filter(|&p| arith::is_prime(p) && p % r == 1) {
            let mut images: Vec<_> = residue::split_roots(p, r)
                .iter()
                .map(|&eta| {
                    let s = residue::SplitPrimeSymbol::new(p, r, eta).map_err(|e| e.to_string())?;
                    residue::to_dirichlet(&s).map_err(|e| e.to_string())
                })
                .collect::<Result<_, String>>()?;
            images.sort();
            let mut expected = chars::enumerate_order_r(p, r).map_err(|e| e.to_string())?;
            expected.sort();
            if images != expected {
                return Err(format!("correspondence failed at p={p} r={r}"));
            }
        }
    }
    Ok(())
}

fn sigma_laws() -> Result<(), String> {
    for (q1, q2) in [(3u64, 7u64), (7, 13), (5, 21)] {
        let product = singular::sigma_q(q1 * q2, 5, 1, 2, 3);
        let split = singular::sigma_q(q1, 5, 1, 2, 3) * singular::sigma_q(q2, 5, 1, 2, 3);
        if product != split {
            return Err(format!("sigma({q1}*{q2}) = {product} != {split}"));
        }
    }
    for p in [3u64, 7, 11, 13] {
        let sigma = singular::sigma_q(p, 4, 0, 1, 3);
        let expected = p as i64 * (singular::count_roots(4, p, 3).count as i64 - 1);
        if sigma != expected {
            return Err(format!("sigma({p}) = {sigma} != {expected}"));
        }
    }
    Ok(())
}

fn gauss_sums() -> Result<(), String> {
    for q in (1..=60u64).filter(|&q| arith::is_squarefree(q)) {
        let tau = chars::gauss_sum_principal(q);
        if (tau.re - arith::moebius(q) as f64).abs() > 1e-9 || tau.im.abs() > 1e-9 {
            return Err(format!("tau(chi_0 mod {q}) = {tau} != mu(q)"));
        }
    }
    for chi in chars::enumerate_order_r(91, 3).map_err(|e| e.to_string())? {
        let norm = chars::gauss_sum(&chi).norm_sqr();
        if (norm - 91.0).abs() > 1e-6 {
            return Err(format!("|tau|^2 = {norm} != 91"));
        }
    }
    Ok(())
}

fn hilbert_reciprocity() -> Result<(), String> {
    for a in [-30i64, -7, -1, 2, 15, 48] {
        for b in [-22i64, -5, 3, 10, 49] {
            if varieties::hilbert_product(a, b) != 1 {
                return Err(format!("product formula failed at ({a}, {b})"));
            }
        }
    }
    Ok(())
}

fn duality() -> Result<(), String> {
    let gap = sieve_lab::duality_gap(3, 6.0, 10.0, false).map_err(|e| e.to_string())?;
    if gap > 1e-6 {
        return Err(format!("duality gap {gap} > 1e-6"));
    }
    Ok(())
}

fn class_list_prefix() -> Result<(), String> {
    let expected = [3u64, 7, 11, 15, 19, 35, 43, 51, 67, 91, 115, 123, 163, 187, 235, 267, 403, 427];
    let got = varieties::class_list(427);
    if got != expected {
        return Err(format!("class_list(427) = {got:?}"));
    }
    Ok(())
}

fn polya_vinogradov() -> Result<(), String> {
    let ratio = chars::pv_max_ratio(120);
    if !(0.0..=1.2).contains(&ratio) {
        return Err(format!("pv ratio {ratio} outside [0, 1.2]"));
    }
    Ok(())
}

fn form_class_numbers() -> Result<(), String> {
    for (d, h) in [(-3i64, 1u64), (-15, 2), (-23, 3), (-427, 2)] {
        let got = forms::class_number(d).map_err(|e| e.to_string())?;
        if got != h {
            return Err(format!("h({d}) = {got} != {h}"));
        }
    }
    Ok(())
}

/// Run every check; returns the number of failures.
pub fn run() -> usize {
    let checks: &[Check] = &[
        ("character identity", character_identity),
        ("symbol correspondence", symbol_correspondence),
        ("sigma laws", sigma_laws),
        ("gauss sums", gauss_sums),
        ("hilbert reciprocity", hilbert_reciprocity),
        ("duality gap", duality),
        ("class list", class_list_prefix),
        ("polya-vinogradov", polya_vinogradov),
        ("form class numbers", form_class_numbers),
    ];
    let mut failures = 0;
    for (name, check) in checks {
        match check() {
            Ok(()) => println!("selftest {name}: ok"),
            Err(msg) => {
                failures += 1;
                println!("selftest {name}: FAILED ({msg})");
            }
        }
    }
    failures
}
