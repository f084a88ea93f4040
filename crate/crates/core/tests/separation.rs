use phunmix::linalg::C64;
use phunmix::separation::{
    istft, mix_stft, read_spectrogram_file, read_wav_mono, sdr, separate, stft, synthetic_sources,
    write_spectrogram, write_wav_mono, MixSpec, SeparationConfig, Spectrogram, StftConfig,
};
use phunmix::SolverKind;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn stft_round_trip(samples in proptest::collection::vec(-1.0f64..1.0, 4096..9000)) {
        let cfg = StftConfig::default();
        let spec = stft(&samples, &cfg).unwrap();
        let back = istft(&spec, &cfg).unwrap();
        prop_assert!(back.len() >= samples.len());
        let err = samples.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(err < 1e-9, "{}", err);
    }

    #[test]
    fn sdr_of_scaled_reference(scale in 0.5f64..2.0) {
        let reference: Vec<f64> = (0..1000).map(|n| (n as f64 * 0.05).sin()).collect();
        let est: Vec<f64> = reference.iter().map(|x| x * scale).collect();
        let expected = (-20.0 * (scale - 1.0).abs().log10()).min(phunmix::separation::SDR_CAP_DB);
        let got = sdr(&est, &reference).unwrap();
        prop_assert!((got - expected).abs() < 1e-6, "{} vs {}", got, expected);
    }
}

#[test]
fn wav_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tone.wav");
    let samples: Vec<f64> = (0..800).map(|n| 0.5 * (n as f64 * 0.1).sin()).collect();
    write_wav_mono(&path, &samples, 8000).unwrap();
    let (back, rate) = read_wav_mono(&path).unwrap();
    assert_eq!(rate, 8000);
    assert_eq!(back.len(), samples.len());
    assert!(samples.iter().zip(&back).all(|(a, b)| (a - b).abs() < 1e-4));
}

#[test]
fn spectrogram_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mag.spec");
    let data: Vec<C64> = (0..12).map(|i| C64::new(i as f64, -(i as f64) / 3.0)).collect();
    let spec = Spectrogram::from_data(3, 4, data).unwrap();
    write_spectrogram(&spec, std::fs::File::create(&path).unwrap()).unwrap();
    assert_eq!(read_spectrogram_file(&path).unwrap(), spec);
}

#[test]
fn determined_mixture_separates_cleanly() {
    let cfg = StftConfig::default();
    let sources = synthetic_sources(2, 8000, 16_000, 3);
    let specs: Vec<Spectrogram> = sources.iter().map(|s| stft(s, &cfg).unwrap()).collect();
    let mix = MixSpec::new(2, 2, vec![0.0, -3.0, -6.0, 0.0], vec![0, 2, 3, 0]).unwrap();
    let mixture = mix_stft(&specs, &mix).unwrap();
    let mags: Vec<Spectrogram> = specs.iter().map(Spectrogram::magnitude).collect();
    let sep = SeparationConfig { seed: 1, ..SeparationConfig::default() };
    let out = separate(&mixture, &mix, &mags, SolverKind::PhunLift, &sep).unwrap();
    for (est, reference) in out.iter().zip(&sources) {
        let signal = istft(est, &cfg).unwrap();
        let score = sdr(&signal[..reference.len()], reference).unwrap();
        assert!(score > 30.0, "{score}");
    }
}
