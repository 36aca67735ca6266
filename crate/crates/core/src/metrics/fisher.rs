/// Relative slack when comparing table probabilities against the observed one.
const RELATIVE_TOLERANCE: f64 = 1e-7;

struct LnFactorials(Vec<f64>);

impl LnFactorials {
    fn new(n: u64) -> Self {
        let mut v = Vec::with_capacity(n as usize + 1);
        let mut acc = 0.0;
        v.push(0.0);
        for k in 1..=n {
            acc += (k as f64).ln();
            v.push(acc);
        }
        LnFactorials(v)
    }

    fn ln_choose(&self, n: u64, k: u64) -> f64 {
        self.0[n as usize] - self.0[k as usize] - self.0[(n - k) as usize]
    }
}

/// Two-sided Fisher exact test on `[[a, b], [c, d]]`: the total probability
/// of all tables with the same margins that are no more likely than the
/// observed one.
pub fn fisher_exact(a: u64, b: u64, c: u64, d: u64) -> f64 {
    let r1 = a + b;
    let r2 = c + d;
    let c1 = a + c;
    let n = r1 + r2;
    if n == 0 {
        return 1.0;
    }
    let lf = LnFactorials::new(n);
    let ln_total = lf.ln_choose(n, c1);
    let ln_p = |x: u64| lf.ln_choose(r1, x) + lf.ln_choose(r2, c1 - x) - ln_total;
    let observed = ln_p(a);
    let lo = c1.saturating_sub(r2);
    let hi = r1.min(c1);
    let threshold = observed + RELATIVE_TOLERANCE.ln_1p();
    let p: f64 = (lo..=hi).map(ln_p).filter(|&l| l <= threshold).map(f64::exp).sum();
    p.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exact rational two-sided p-value by enumerating hypergeometric tables
    /// with integer binomials.
    fn oracle(a: u64, b: u64, c: u64, d: u64) -> f64 {
        let binom = |n: u64, k: u64| -> u128 {
            let mut r: u128 = 1;
            for i in 0..k {
                r = r * (n - i) as u128 / (i + 1) as u128;
            }
            r
        };
        let (r1, r2, c1) = (a + b, c + d, a + c);
        let weight = |x: u64| binom(r1, x) * binom(r2, c1 - x);
        let obs = weight(a);
        let total: u128 = (c1.saturating_sub(r2)..=r1.min(c1)).map(weight).sum();
        let hit: u128 = (c1.saturating_sub(r2)..=r1.min(c1)).map(weight).filter(|&w| w <= obs).sum();
        hit as f64 / total as f64
    }

    #[test]
    fn known_tables() {
        // Tea-tasting table [[3,1],[1,3]]: p = 34/70.
        assert!((fisher_exact(3, 1, 1, 3) - 34.0 / 70.0).abs() < 1e-12);
        assert!((fisher_exact(8, 2, 4, 6) - oracle(8, 2, 4, 6)).abs() < 1e-12);
        assert_eq!(fisher_exact(5, 5, 5, 5), 1.0);
        assert_eq!(fisher_exact(0, 0, 0, 0), 1.0);
        assert_eq!(fisher_exact(0, 0, 3, 4), 1.0);
    }

    #[test]
    fn small_tables_match_enumeration() {
        for n in 0..=16u64 {
            for a in 0..=n {
                for b in 0..=n - a {
                    for c in 0..=n - a - b {
                        let d = n - a - b - c;
                        let p = fisher_exact(a, b, c, d);
                        assert!((p - oracle(a, b, c, d)).abs() < 1e-9, "[[{a},{b}],[{c},{d}]]");
                    }
                }
            }
        }
    }

    #[test]
    fn ln_factorials_agree_with_direct_sums() {
        let lf = LnFactorials::new(30);
        for n in 0..=30u64 {
            let direct: f64 = (2..=n).map(|k| (k as f64).ln()).sum();
            assert!((lf.0[n as usize] - direct).abs() < 1e-9);
        }
    }
}
