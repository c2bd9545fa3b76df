use std::f64::consts::TAU;

use omtk::rng::NoiseStream;
use omtk::spectral::{tin2_proxies, tin3_proxies, welch_psd, Spectrum, WelchConfig};
use omtk::trace::{TimeTrace, UnitTag};

/// Local maxima standing more than `ratio` above the band median.
fn peaks(spec: &Spectrum, ratio: f64, f_max: f64) -> Vec<usize> {
    let v = spec.values();
    let hi = spec.bin(f_max).min(v.len() - 2);
    let mut sorted = v[2..=hi].to_vec();
    sorted.sort_by(f64::total_cmp);
    let floor = sorted[sorted.len() / 2];
    (2..=hi)
        .filter(|&k| v[k] >= v[k - 1] && v[k] >= v[k + 1] && v[k] > ratio * floor)
        .collect()
}

#[test]
fn every_mixing_peak_is_predicted_by_a_proxy() {
    // Two tones through a quadratic and cubic response, over a white floor.
    let fs = 1e5;
    let (f1, f2) = (7_031.25, 11_718.75);
    let mut rng = NoiseStream::new(3, 0);
    let linear = TimeTrace::from_fn(1 << 18, fs, UnitTag::detuning(), |t| {
        0.1 * (TAU * f1 * t).cos() + 0.08 * (TAU * f2 * t + 0.4).cos()
    })
    .unwrap();
    let noise: Vec<f64> = (0..linear.len()).map(|_| 1e-6 * rng.normal()).collect();
    let linear = TimeTrace::new(
        linear
            .samples()
            .iter()
            .zip(&noise)
            .map(|(x, n)| x + n)
            .collect(),
        fs,
        UnitTag::detuning(),
    )
    .unwrap();
    let mixed = linear.map(|x| x + 0.3 * x * x - 0.5 * x * x * x);

    let welch = WelchConfig::new(4096);
    let s_lin = welch_psd(&linear, &welch).unwrap();
    let s_out = welch_psd(&mixed, &welch).unwrap();
    let tin2 = tin2_proxies(&s_lin);
    let tin3 = tin3_proxies(&s_lin);
    let f_max = 0.45 * fs;
    let candidates: Vec<Vec<usize>> = [
        &s_lin,
        &tin2.s_plus,
        &tin2.s_minus,
        &tin3.s_pp,
        &tin3.s_pm,
        &tin3.s_mm,
    ]
    .iter()
    .map(|s| peaks(s, 1e3, f_max))
    .collect();

    let observed = peaks(&s_out, 1e3, f_max);
    assert!(observed.len() >= 8, "only {} peaks", observed.len());
    for k in observed {
        let explained = candidates.iter().flatten().any(|&c| c.abs_diff(k) <= 1);
        assert!(
            explained,
            "peak at {} Hz has no proxy counterpart",
            s_out.frequency(k)
        );
    }
}
