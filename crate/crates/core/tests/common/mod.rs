#![allow(dead_code)]

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Magnitude spectrum (bins 0..=n/2) of `samples` after a Hann window and
/// zero-padding to `fft_len`.
pub fn spectrum(samples: &[f64], fft_len: usize, hann: bool) -> Vec<f64> {
    assert!(fft_len >= samples.len());
    let n = samples.len();
    let mut buf: Vec<Complex<f64>> = samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let w = if hann && n > 1 {
                0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos()
            } else {
                1.0
            };
            Complex::new(x * w, 0.0)
        })
        .collect();
    buf.resize(fft_len, Complex::new(0.0, 0.0));
    FftPlanner::new()
        .plan_fft_forward(fft_len)
        .process(&mut buf);
    buf[..=fft_len / 2].iter().map(|c| c.norm()).collect()
}

/// Frequency of the largest spectral peak, refined by parabolic
/// interpolation over the log magnitudes of the neighbouring bins.
pub fn peak_frequency(samples: &[f64], sample_rate: u32, fft_len: usize) -> f64 {
    let mag = spectrum(samples, fft_len, true);
    let k = (1..mag.len() - 1)
        .max_by(|&a, &b| mag[a].total_cmp(&mag[b]))
        .unwrap();
    let (a, b, c) = (mag[k - 1].ln(), mag[k].ln(), mag[k + 1].ln());
    let delta = 0.5 * (a - c) / (a - 2.0 * b + c);
    (k as f64 + delta) * sample_rate as f64 / fft_len as f64
}

/// Fraction of spectral energy at or above `hz` (rectangular window).
pub fn energy_fraction_above(samples: &[f64], sample_rate: u32, hz: f64) -> f64 {
    let fft_len = samples.len().next_power_of_two();
    let mag = spectrum(samples, fft_len, false);
    let bin_hz = sample_rate as f64 / fft_len as f64;
    let total: f64 = mag.iter().map(|m| m * m).sum();
    let above: f64 = mag
        .iter()
        .enumerate()
        .filter(|(k, _)| *k as f64 * bin_hz >= hz)
        .map(|(_, m)| m * m)
        .sum();
    above / total
}

pub fn cents(f: f64, target: f64) -> f64 {
    1200.0 * (f / target).log2()
}
