//! Independent reference implementations used to check the library.
//! Nothing here calls into the crate under test.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::f64::consts::PI;

/// In-place iterative radix-2 FFT; `re.len()` must be a power of two.
pub fn fft(re: &mut [f64], im: &mut [f64]) {
    let n = re.len();
    assert!(n.is_power_of_two() && im.len() == n);
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            re.swap(i, j);
            im.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let ang = -2.0 * PI / len as f64;
        for start in (0..n).step_by(len) {
            for k in 0..len / 2 {
                let (s, c) = (ang * k as f64).sin_cos();
                let a = start + k;
                let b = a + len / 2;
                let tr = re[b] * c - im[b] * s;
                let ti = re[b] * s + im[b] * c;
                re[b] = re[a] - tr;
                im[b] = im[a] - ti;
                re[a] += tr;
                im[a] += ti;
            }
        }
        len <<= 1;
    }
}

/// Welch power spectrum: Hann-windowed segments of `seg` samples with 50%
/// overlap, averaged periodograms for bins `0..=seg/2`.
pub fn welch_psd(x: &[f64], seg: usize) -> Vec<f64> {
    let window: Vec<f64> = (0..seg)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / seg as f64).cos())
        .collect();
    let mut acc = vec![0.0; seg / 2 + 1];
    let mut count = 0;
    let mut start = 0;
    while start + seg <= x.len() {
        let mut re: Vec<f64> = x[start..start + seg]
            .iter()
            .zip(&window)
            .map(|(a, w)| a * w)
            .collect();
        let mut im = vec![0.0; seg];
        fft(&mut re, &mut im);
        for k in 0..acc.len() {
            acc[k] += re[k] * re[k] + im[k] * im[k];
        }
        count += 1;
        start += seg / 2;
    }
    acc.iter().map(|v| v / count as f64).collect()
}

/// Least-squares slope of PSD in dB against log2(frequency), i.e. dB per
/// octave, over bins with frequency in `[lo, hi]`.
pub fn psd_slope_db_per_octave(psd: &[f64], seg: usize, rate: f64, lo: f64, hi: f64) -> f64 {
    let pts: Vec<(f64, f64)> = psd
        .iter()
        .enumerate()
        .map(|(k, p)| (k as f64 * rate / seg as f64, *p))
        .filter(|(f, _)| *f >= lo && *f <= hi)
        .map(|(f, p)| (f.log2(), 10.0 * p.log10()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Mean power per octave band starting at `f0`: returns one value per band
/// `[f0·2^k, f0·2^(k+1))` below `f_max`.
pub fn octave_band_power(psd: &[f64], seg: usize, rate: f64, f0: f64, f_max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut lo = f0;
    while lo * 2.0 <= f_max {
        let band: Vec<f64> = psd
            .iter()
            .enumerate()
            .filter(|(k, _)| {
                let f = *k as f64 * rate / seg as f64;
                f >= lo && f < lo * 2.0
            })
            .map(|(_, p)| *p)
            .collect();
        out.push(band.iter().sum::<f64>() / band.len() as f64);
        lo *= 2.0;
    }
    out
}

/// Every minimum-cost (S, D, I) split for aligning `r` against `h`, found
/// by enumerating all edit paths. Returns the minimum cost and the set.
pub fn exhaustive_edit_counts<T: PartialEq>(
    r: &[T],
    h: &[T],
) -> (usize, BTreeSet<(usize, usize, usize)>) {
    fn walk<T: PartialEq>(
        r: &[T],
        h: &[T],
        i: usize,
        j: usize,
        s: usize,
        d: usize,
        ins: usize,
        best: &mut (usize, BTreeSet<(usize, usize, usize)>),
    ) {
        let cost = s + d + ins;
        if cost > best.0 {
            return;
        }
        if i == r.len() && j == h.len() {
            if cost < best.0 {
                best.0 = cost;
                best.1.clear();
            }
            best.1.insert((s, d, ins));
            return;
        }
        if i < r.len() && j < h.len() {
            if r[i] == h[j] {
                walk(r, h, i + 1, j + 1, s, d, ins, best);
            } else {
                walk(r, h, i + 1, j + 1, s + 1, d, ins, best);
            }
        }
        if i < r.len() {
            walk(r, h, i + 1, j, s, d + 1, ins, best);
        }
        if j < h.len() {
            walk(r, h, i, j + 1, s, d, ins + 1, best);
        }
    }
    let mut best = (usize::MAX, BTreeSet::new());
    walk(r, h, 0, 0, 0, 0, 0, &mut best);
    best
}

/// Natural log of the gamma function (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + 7.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Student t density with `df` degrees of freedom.
pub fn t_density(x: f64, df: f64) -> f64 {
    let ln_c = ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * PI).ln();
    (ln_c - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp()
}

/// Two-tailed p-value of correlation `r` over `n` samples: Simpson's rule
/// over the t density from 0 to |t|.
pub fn correlation_p_simpson(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    let t = (r * (df / (1.0 - r * r)).sqrt()).abs();
    let steps = 20_000;
    let h = t / steps as f64;
    let mut sum = t_density(0.0, df) + t_density(t, df);
    for k in 1..steps {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * t_density(k as f64 * h, df);
    }
    let central = sum * h / 3.0;
    (1.0 - 2.0 * central).max(0.0)
}

/// Plain two-pass Pearson r.
pub fn pearson_naive(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Three-sigma half-width of a binomial proportion over `n` trials.
pub fn binomial_3sigma(p: f64, n: usize) -> f64 {
    3.0 * (p * (1.0 - p) / n as f64).sqrt()
}

/// Relative increase in percent, straight from its definition.
pub fn relative_increase_pct(base: f64, degraded: f64) -> f64 {
    (degraded - base) / base * 100.0
}

/// Occlusion window by the literal rule: a third of the frames, rounded to
/// the nearest integer (at least one), at the start or centred; none for
/// words shorter than three frames.
pub fn occlusion_window_rule(n: usize, middle: bool) -> Option<(usize, usize)> {
    if n < 3 {
        return None;
    }
    let len = ((n as f64 / 3.0).round() as usize).max(1);
    let start = if middle { (n - len) / 2 } else { 0 };
    Some((start, start + len))
}
