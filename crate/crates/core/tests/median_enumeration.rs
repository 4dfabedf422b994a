use qgibbs::qpe::{median_distribution, median_rank, median_tail_mass, rounded_distribution, two_peaks};

fn enumerate_median(single: &[f64], eta: u32) -> Vec<f64> {
    let n = single.len();
    let mut out = vec![0.0; n];
    let total = n.pow(eta);
    let rank = median_rank(eta) as usize;
    let mut tuple = vec![0usize; eta as usize];
    for code in 0..total {
        let mut c = code;
        let mut p = 1.0;
        for slot in tuple.iter_mut() {
            *slot = c % n;
            c /= n;
            p *= single[*slot];
        }
        let mut sorted = tuple.clone();
        sorted.sort_unstable();
        out[sorted[rank - 1]] += p;
    }
    out
}

#[test]
fn median_law_matches_tuple_enumeration() {
    let emax = 1.0;
    for m in [2u32, 3, 4] {
        let step = 8.0 * emax / (1u64 << m) as f64;
        for (eta, frac) in [(1u32, 0.5), (2, 0.3), (3, 0.5), (4, 0.77), (5, 0.5)] {
            if m == 4 && eta > 5 {
                continue;
            }
            let energy = (2.0 + frac) * step;
            let single = rounded_distribution(energy, m, 4, emax);
            let fast = median_distribution(&single, eta);
            let slow = enumerate_median(&single, eta);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-12, "m={m} eta={eta}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn midpoint_tail_with_five_runs() {
    let (m, emax) = (4u32, 1.0);
    let step = 8.0 * emax / 16.0;
    let energy = 5.5 * step;
    let single = rounded_distribution(energy, m, 4, emax);
    let peaks = two_peaks(energy, m, emax);
    let slow = enumerate_median(&single, 5);
    let tail_slow: f64 = slow.iter().enumerate().filter(|(i, _)| *i != peaks.0 && *i != peaks.1).map(|(_, p)| p).sum();
    let tail = median_tail_mass(&single, 5, peaks);
    assert!((tail - tail_slow).abs() < 1e-13);
    assert!(tail <= 2f64.powi(-5), "{tail}");
}
