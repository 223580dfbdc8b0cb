use statrs::function::gamma::ln_gamma;

pub fn ln_factorial(n: i64) -> f64 {
    if n < 171 {
        (2..=n).fold(1.0f64, |acc, k| acc * k as f64).ln()
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// Clebsch–Gordan coefficient `⟨l1 m1; l2 m2 | L M⟩` (Condon–Shortley phase),
/// integer angular momenta, by the Racah sum. Zero outside selection rules.
pub fn clebsch_gordan(l1: i64, m1: i64, l2: i64, m2: i64, big_l: i64, big_m: i64) -> f64 {
    if l1 < 0 || l2 < 0 || big_l < 0 {
        return 0.0;
    }
    if m1.abs() > l1 || m2.abs() > l2 || big_m.abs() > big_l {
        return 0.0;
    }
    if m1 + m2 != big_m || big_l < (l1 - l2).abs() || big_l > l1 + l2 {
        return 0.0;
    }
    let lf = ln_factorial;
    let ln_pref = 0.5
        * (((2 * big_l + 1) as f64).ln() + lf(big_l + l1 - l2) + lf(big_l - l1 + l2) + lf(l1 + l2 - big_l)
            - lf(l1 + l2 + big_l + 1)
            + lf(big_l + big_m)
            + lf(big_l - big_m)
            + lf(l1 - m1)
            + lf(l1 + m1)
            + lf(l2 - m2)
            + lf(l2 + m2));
    let kmin = 0.max(l2 - big_l - m1).max(l1 - big_l + m2);
    let kmax = (l1 + l2 - big_l).min(l1 - m1).min(l2 + m2);
    let mut sum = 0.0;
    for k in kmin..=kmax {
        let ln_den = lf(k)
            + lf(l1 + l2 - big_l - k)
            + lf(l1 - m1 - k)
            + lf(l2 + m2 - k)
            + lf(big_l - l2 + m1 + k)
            + lf(big_l - l1 - m2 + k);
        let t = (ln_pref - ln_den).exp();
        sum += if k % 2 == 0 { t } else { -t };
    }
    sum
}
