use std::collections::BTreeMap;

use avsr_gauge_core::gaincurve::{effective_snr_gain, WerCurve};
use avsr_gauge_core::mafi::{
    alignment_cost, mafi_score, p_value, pearson, stars, PhonSegment, N_FEATURES,
};
use avsr_gauge_core::noisemix::{generate_pink_noise, mix_at_snr, MixSpec};
use avsr_gauge_core::occlusion::{
    apply, format_textgrid, occlusion_window, parse_textgrid, plan, Fill, Frame, ManifestFile,
    Position, Region, WordSpan,
};
use avsr_gauge_core::scoring::io::score_pairs;
use avsr_gauge_core::scoring::{align, iwer_table, ErrorCounts, Token};
use avsr_gauge_core::simkit::{simulate, sweep, synthetic_corpus, CorpusSpec, SyntheticRecognizer};
use avsr_gauge_core::AudioBuffer;
use proptest::prelude::*;

fn word(i: u8) -> String {
    ["AB", "CD", "EF", "GH", "IJ", "KL"][i as usize % 6].to_string()
}

fn tokens(ids: &[u8]) -> Vec<Token> {
    ids.iter().map(|i| Token::new(word(*i)).unwrap()).collect()
}

fn transcripts(utts: &[Vec<u8>]) -> BTreeMap<String, String> {
    utts.iter()
        .enumerate()
        .map(|(i, u)| {
            let text: Vec<String> = u.iter().map(|w| word(*w)).collect();
            (format!("u{i:03}"), text.join(" "))
        })
        .collect()
}

/// Strictly decreasing WER curve on an integer SNR grid.
fn decreasing_curve() -> impl Strategy<Value = Vec<(f64, f64)>> {
    (-15i32..0, prop::collection::vec(0.1f64..5.0, 4..20)).prop_map(|(lo, drops)| {
        let mut wer = 100.0;
        drops
            .iter()
            .enumerate()
            .map(|(i, d)| {
                wer -= d;
                (lo as f64 + i as f64, wer)
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pink_noise_is_seed_deterministic(seed in any::<u64>(), n in 1usize..4000) {
        let a = generate_pink_noise(n, 16_000, seed).unwrap();
        let b = generate_pink_noise(n, 16_000, seed).unwrap();
        prop_assert_eq!(a.samples(), b.samples());
        prop_assert!(a.peak() <= 0.9 + 1e-12);
    }

    #[test]
    fn mixing_is_scale_equivariant(
        seed in any::<u64>(),
        snr in -10.0f64..10.0,
        gain in 0.05f64..0.9,
    ) {
        let speech: Vec<f64> = (0..4000).map(|i| 0.5 * (i as f64 * 0.05).sin()).collect();
        let speech = AudioBuffer::new(speech, 16_000).unwrap();
        let noise = generate_pink_noise(1500, 16_000, seed).unwrap();
        let spec = MixSpec { peak_policy: avsr_gauge_core::PeakPolicy::Clip, ..MixSpec::new(snr) };
        let base = mix_at_snr(&speech.scaled(0.1), &noise, &spec).unwrap();
        let scaled = mix_at_snr(&speech.scaled(0.1 * gain), &noise, &spec).unwrap();
        // noise level follows the speech, so the whole mixture scales
        prop_assert!(!base.clipped && !scaled.clipped);
        for (a, b) in base.audio.samples().iter().zip(scaled.audio.samples()) {
            prop_assert!((a * gain - b).abs() < 1e-12);
        }
    }

    #[test]
    fn alignment_counts_are_consistent(
        r in prop::collection::vec(0u8..4, 0..10),
        h in prop::collection::vec(0u8..4, 0..10),
    ) {
        let a = align(&tokens(&r), &tokens(&h));
        prop_assert_eq!(a.matches() + a.subs() + a.dels(), r.len());
        prop_assert_eq!(a.matches() + a.subs() + a.ins(), h.len());
        prop_assert!(a.errors() <= r.len().max(h.len()));
        prop_assert_eq!(a.errors(), align(&tokens(&h), &tokens(&r)).errors());
        prop_assert_eq!(align(&tokens(&r), &tokens(&r)).errors(), 0);
    }

    #[test]
    fn iwer_table_conserves_errors(
        pairs in prop::collection::vec(
            (prop::collection::vec(0u8..6, 1..8), prop::collection::vec(0u8..6, 0..8)),
            1..15,
        )
    ) {
        let (refs, hyps): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let scored = score_pairs(&transcripts(&refs), &transcripts(&hyps)).unwrap();
        let counts = ErrorCounts::sum(scored.iter().map(|s| &s.alignment));
        let table = iwer_table(scored.iter().map(|s| &s.alignment), 0);
        let sd: usize = table.iter().map(|w| w.subs + w.dels).sum();
        let n: usize = table.iter().map(|w| w.count).sum();
        prop_assert_eq!(sd, counts.subs + counts.dels);
        prop_assert_eq!(n, counts.ref_words);
    }

    #[test]
    fn insertions_alone_leave_iwer_at_zero(
        refs in prop::collection::vec(prop::collection::vec(0u8..6, 1..8), 1..10),
        extra in prop::collection::vec((0usize..9, 0u8..6), 1..10),
    ) {
        let mut hyps = refs.clone();
        for (k, (pos, w)) in extra.iter().enumerate() {
            let utt = &mut hyps[k % refs.len()];
            let at = pos % (utt.len() + 1);
            utt.insert(at, *w);
        }
        let scored = score_pairs(&transcripts(&refs), &transcripts(&hyps)).unwrap();
        let counts = ErrorCounts::sum(scored.iter().map(|s| &s.alignment));
        prop_assert_eq!(counts.subs + counts.dels, 0);
        prop_assert!(counts.ins >= extra.len().min(1));
        let table = iwer_table(scored.iter().map(|s| &s.alignment), 0);
        prop_assert!(table.iter().all(|w| w.iwer == 0.0 && w.subs == 0 && w.dels == 0));
    }

    #[test]
    fn gain_recovers_exact_translation(pts in decreasing_curve(), shift in 0.0f64..3.0, frac in 0.0f64..1.0) {
        let ao = WerCurve::from_pairs("AO", &pts).unwrap();
        let av = ao.shifted(-shift);
        let lo = ao.min_snr() + shift;
        let ref_snr = lo + frac * (ao.max_snr() - lo);
        let g = effective_snr_gain(&ao, &av, ref_snr).unwrap();
        prop_assert!(!g.bounded);
        prop_assert!((g.gain_db - shift).abs() < 1e-9, "{} vs {}", g.gain_db, shift);
    }

    #[test]
    fn gain_invariant_to_wer_scale_and_snr_offset(
        pts in decreasing_curve(),
        shift in 0.0f64..3.0,
        scale in 0.1f64..1.0,
        offset in -20.0f64..20.0,
    ) {
        let ao = WerCurve::from_pairs("AO", &pts).unwrap();
        let av = ao.shifted(-shift);
        let ref_snr = ao.max_snr() - 0.5;
        let base = effective_snr_gain(&ao, &av, ref_snr).unwrap().gain_db;
        let rescale = |c: &WerCurve| {
            let p: Vec<(f64, f64)> = c.points().iter().map(|p| (p.snr_db, p.wer * scale)).collect();
            WerCurve::from_pairs(c.label(), &p).unwrap()
        };
        let scaled = effective_snr_gain(&rescale(&ao), &rescale(&av), ref_snr).unwrap().gain_db;
        let moved = effective_snr_gain(&ao.shifted(offset), &av.shifted(offset), ref_snr + offset)
            .unwrap()
            .gain_db;
        prop_assert!((scaled - base).abs() < 1e-9);
        prop_assert!((moved - base).abs() < 1e-9);
    }

    #[test]
    fn better_av_curve_never_gives_negative_gain(
        pts in decreasing_curve(),
        drops in prop::collection::vec(0.0f64..5.0, 20),
        frac in 0.0f64..1.0,
    ) {
        let ao = WerCurve::from_pairs("AO", &pts).unwrap();
        let av_pts: Vec<(f64, f64)> = pts
            .iter()
            .zip(&drops)
            .map(|((s, w), d)| (*s, (w - d).max(0.0)))
            .collect();
        let av = WerCurve::from_pairs("AV", &av_pts).unwrap();
        let ref_snr = ao.min_snr() + frac * (ao.max_snr() - ao.min_snr());
        if let Ok(g) = effective_snr_gain(&ao, &av, ref_snr) {
            prop_assert!(g.gain_db >= -1e-9, "{:?}", g);
        }
        let same = effective_snr_gain(&ao, &ao, ref_snr).unwrap();
        prop_assert!(same.gain_db.abs() < 1e-9);
    }

    #[test]
    fn occlusion_windows_sit_inside_words(n in 1usize..500) {
        for pos in [Position::Initial, Position::Middle] {
            match occlusion_window(n, pos) {
                None => prop_assert!(n < 3),
                Some(w) => {
                    prop_assert!(n >= 3);
                    prop_assert!(w.end_frame < n, "window reaches last frame");
                    let centre = (w.start_frame + w.end_frame) as f64 / 2.0;
                    if pos == Position::Middle {
                        prop_assert!((centre - n as f64 / 2.0).abs() <= 1.0);
                    } else {
                        prop_assert_eq!(w.start_frame, 0);
                    }
                }
            }
        }
    }

    #[test]
    fn applied_frames_outside_windows_are_untouched(
        durs in prop::collection::vec((1u32..30, 0u32..5), 1..6),
        fill in prop::sample::select(vec![Fill::SolidGray, Fill::FrameMean, Fill::Blur]),
        pixels in prop::collection::vec(any::<u8>(), 8 * 6 * 3),
    ) {
        let fps = 25.0;
        let mut t = 0.0;
        let mut spans = Vec::new();
        for (i, (len, gap)) in durs.iter().enumerate() {
            t += *gap as f64 / fps;
            let end = t + *len as f64 / fps;
            spans.push(WordSpan::new("u", Token::new(word(i as u8)).unwrap(), t, end).unwrap());
            t = end;
        }
        let m = plan(&spans, fps, Position::Middle, Region::Rect { x: 1, y: 1, w: 5, h: 4 }, fill).unwrap();
        let n_frames = (t * fps).ceil() as usize + 1;
        let frames: Vec<Frame> = (0..n_frames)
            .map(|i| {
                let data: Vec<u8> = pixels.iter().map(|p| p.wrapping_add(i as u8)).collect();
                Frame::new(8, 6, 3, data).unwrap()
            })
            .collect();
        let out = apply(&frames, &m).unwrap();
        for (i, (a, b)) in frames.iter().zip(&out).enumerate() {
            if !m.is_occluded(i) {
                prop_assert_eq!(a, b);
            } else {
                // pixels outside the rectangle are kept too
                prop_assert_eq!(a.pixel(0, 0), b.pixel(0, 0));
                prop_assert_eq!(a.pixel(7, 5), b.pixel(7, 5));
            }
        }
        let json = ManifestFile::new(vec![m.clone()]).to_json();
        prop_assert_eq!(ManifestFile::from_json(&json).unwrap().manifests, vec![m]);
    }

    #[test]
    fn textgrid_round_trip(
        words in prop::collection::vec((0u8..6, 1u32..400, 0u32..100), 1..10),
    ) {
        let mut t = 0.0;
        let mut spans = Vec::new();
        for (w, len, gap) in &words {
            let start = t + *gap as f64 / 1000.0;
            let end = start + *len as f64 / 1000.0;
            spans.push(WordSpan::new("utt", Token::new(word(*w)).unwrap(), start, end).unwrap());
            t = end;
        }
        let text = format_textgrid(&spans, "words", t + 0.25);
        prop_assert_eq!(parse_textgrid(&text, "words", "utt").unwrap(), spans);
    }

    #[test]
    fn pearson_is_affine_invariant(
        xy in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 5..60),
        a in 0.01f64..50.0,
        b in -100.0f64..100.0,
        c in -50.0f64..-0.01,
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
        let Ok(r) = pearson(&x, &y) else { return Ok(()); };
        let xa: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let yc: Vec<f64> = y.iter().map(|v| c * v + b).collect();
        prop_assert!((pearson(&xa, &y).unwrap() - r).abs() < 1e-9);
        prop_assert!((pearson(&x, &yc).unwrap() + r).abs() < 1e-9);
        prop_assert!((-1.0..=1.0).contains(&r));
        let p = p_value(r, x.len()).unwrap().p;
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn stars_follow_thresholds(p in 0.0f64..1.0) {
        let expected = if p < 0.001 { "***" } else if p < 0.01 { "**" } else { "" };
        prop_assert_eq!(stars(p), expected);
    }

    #[test]
    fn feature_flips_degrade_score_monotonically(
        base in prop::collection::vec(prop::collection::vec(prop::sample::select(vec![-1i8, 1]), N_FEATURES), 3),
        order in Just((0..3 * N_FEATURES).collect::<Vec<_>>()).prop_shuffle(),
        budget in 1usize..=14,
    ) {
        let seg = |f: &Vec<i8>| PhonSegment {
            phone: "X".into(),
            ipa: "x".into(),
            features: f.clone().try_into().unwrap(),
        };
        let target: Vec<PhonSegment> = base.iter().map(seg).collect();
        prop_assert_eq!(mafi_score(&target, std::slice::from_ref(&target)).unwrap(), 0.0);
        let mut guess = base.clone();
        let mut last = 0.0;
        for (k, idx) in order.iter().take(budget).enumerate() {
            let (s, f) = (idx / N_FEATURES, idx % N_FEATURES);
            guess[s][f] = -guess[s][f];
            let g: Vec<PhonSegment> = guess.iter().map(seg).collect();
            let score = mafi_score(&target, std::slice::from_ref(&g)).unwrap();
            prop_assert!(score < last);
            let expected = -((k + 1) as f64 / N_FEATURES as f64) / 3.0;
            prop_assert!((score - expected).abs() < 1e-12);
            prop_assert!((alignment_cost(&target, &g) - (k + 1) as f64 / N_FEATURES as f64).abs() < 1e-12);
            last = score;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn simulation_is_reproducible(seed in any::<u64>(), snr in -15.0f64..10.0) {
        let refs = synthetic_corpus(&CorpusSpec { n_words: 600, vocab_size: 50, ..CorpusSpec::default() }, seed).unwrap();
        let rec = SyntheticRecognizer::default();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| simulate(&refs, &rec, snr, seed));
        let b = four.install(|| simulate(&refs, &rec, snr, seed));
        prop_assert_eq!(&a, &b);
        let grid = [-10.0, -5.0, 0.0, 5.0];
        let s1 = one.install(|| sweep(&rec, &rec.with_shift(2.0), &refs, &grid, seed).unwrap());
        let s2 = four.install(|| sweep(&rec, &rec.with_shift(2.0), &refs, &grid, seed).unwrap());
        prop_assert_eq!(s1, s2);
    }
}
