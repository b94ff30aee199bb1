use lcac::auth::{derive_locations, embed, extract, read_key, write_key, AuthConfig, SecretBundle, Strategy, Verdict};
use lcac::bits::{hamming, random_bits};
use lcac::channel::Pipeline;
use lcac::layout::{demodulate, modulate, read_grid, write_grid, BarcodeSpec, GridLayout, Role, DEFAULT_LAYOUT_SEED};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn default_geometry() {
    let spec = BarcodeSpec::default();
    assert_eq!(spec.side(), 47);
    assert_eq!(spec.source_bits(), 880);
    assert_eq!(spec.coded_bits(), 4080);
    let layout = GridLayout::new(&spec, DEFAULT_LAYOUT_SEED).unwrap();
    let count = |r| layout.roles.iter().filter(|&&x| x == r).count();
    assert_eq!(count(Role::Data), 2040);
    assert_eq!(count(Role::Training1) + count(Role::Training2) + count(Role::Header), 47 * 47 - 2040);
}

#[test]
fn noiseless_roundtrip_both_strategies() {
    let spec = BarcodeSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for strategy in [Strategy::Strategy1, Strategy::Strategy2] {
        for k_a in [147, 179, 247] {
            let cfg = AuthConfig::preset(k_a, strategy).unwrap();
            let p = Pipeline::new(&spec, &cfg, DEFAULT_LAYOUT_SEED).unwrap();
            let src = random_bits(&mut rng, spec.source_bits());
            let bundle = SecretBundle::random(&mut rng, k_a, &src);
            let tx = p.send(&src, &bundle).unwrap();
            let rx = p.receive(&tx.grid, &bundle).unwrap();
            assert_eq!(rx.s_c1_hat, src);
            assert_eq!(rx.s_a1_hat, bundle.s_a1);
            assert_eq!(rx.verdict, Verdict::Legal);
            // Embedding only ever flips the chosen parity positions.
            assert!(hamming(&tx.s_e2, &tx.s_c2) <= cfg.n_a);
        }
    }
}

#[test]
fn wrong_key_is_illegal() {
    let spec = BarcodeSpec::default();
    let cfg = AuthConfig::preset(147, Strategy::Strategy1).unwrap();
    let p = Pipeline::new(&spec, &cfg, DEFAULT_LAYOUT_SEED).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let src = random_bits(&mut rng, spec.source_bits());
    let bundle = SecretBundle::random(&mut rng, 147, &src);
    let other = SecretBundle::random(&mut rng, 147, &src);
    let tx = p.send(&src, &bundle).unwrap();
    assert_eq!(p.receive(&tx.grid, &other).unwrap().verdict, Verdict::Illegal);
}

#[test]
fn bundle_bound_to_source() {
    let spec = BarcodeSpec::default();
    let cfg = AuthConfig::preset(147, Strategy::Strategy1).unwrap();
    let p = Pipeline::new(&spec, &cfg, DEFAULT_LAYOUT_SEED).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let src = random_bits(&mut rng, spec.source_bits());
    let bundle = SecretBundle::random(&mut rng, 147, &src);
    let mut other = src.clone();
    other[0] ^= 1;
    assert!(p.send(&other, &bundle).is_err());
}

#[test]
fn strategies_differ_only_at_embedding_modules() {
    let spec = BarcodeSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let src = random_bits(&mut rng, spec.source_bits());
    let bundle = SecretBundle::random(&mut rng, 147, &src);
    let mut txs = Vec::new();
    let mut touched = std::collections::BTreeSet::new();
    for strategy in [Strategy::Strategy1, Strategy::Strategy2] {
        let cfg = AuthConfig::preset(147, strategy).unwrap();
        let p = Pipeline::new(&spec, &cfg, DEFAULT_LAYOUT_SEED).unwrap();
        let tx = p.send(&src, &bundle).unwrap();
        let bps = spec.bits_per_symbol();
        touched.extend(tx.locations.positions.iter().map(|&b| b / bps));
        txs.push((tx, p));
    }
    let (a, pa) = &txs[0];
    let (b, _) = &txs[1];
    let data_cells: Vec<usize> = (0..a.grid.roles.len()).filter(|&c| a.grid.roles[c] == Role::Data).collect();
    let layout = pa.layout();
    for (cell, (&x, &y)) in a.grid.intensities.iter().zip(&b.grid.intensities).enumerate() {
        if x != y {
            let sym = layout.data_order.iter().position(|&c| c == cell).expect("only data modules differ");
            assert!(touched.contains(&sym), "module {cell} differs outside the embedding set");
        }
    }
    assert!(!data_cells.is_empty());
}

#[test]
fn pgm_roundtrip_with_metadata() {
    let spec = BarcodeSpec::default();
    let cfg = AuthConfig::preset(147, Strategy::Strategy2).unwrap();
    let p = Pipeline::new(&spec, &cfg, 99).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let src = random_bits(&mut rng, spec.source_bits());
    let bundle = SecretBundle::random(&mut rng, 147, &src);
    let tx = p.send(&src, &bundle).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("b.pgm");
    write_grid(&tx.grid, &spec, 99, &img).unwrap();
    let (grid, meta) = read_grid(&img).unwrap();
    assert_eq!(grid, tx.grid);
    assert_eq!(meta.layout_seed, 99);
    assert_eq!(meta.spec, spec);

    let key = dir.path().join("k.hex");
    write_key(&bundle, &key).unwrap();
    let back = read_key(&key).unwrap();
    assert_eq!(back, bundle);
    assert_eq!(p.receive(&grid, &back).unwrap().verdict, Verdict::Legal);
}

#[test]
fn binary_preset_roundtrip() {
    let spec = BarcodeSpec::binary();
    spec.validate().unwrap();
    let cfg = AuthConfig::preset(147, Strategy::Strategy1).unwrap();
    let p = Pipeline::new(&spec, &cfg, DEFAULT_LAYOUT_SEED).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let src = random_bits(&mut rng, spec.source_bits());
    let bundle = SecretBundle::random(&mut rng, 147, &src);
    let tx = p.send(&src, &bundle).unwrap();
    assert_eq!(tx.grid.side, spec.side());
    let rx = p.receive(&tx.grid, &bundle).unwrap();
    assert_eq!(rx.s_c1_hat, src);
    assert_eq!(rx.verdict, Verdict::Legal);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn modulation_roundtrip(seed in any::<u64>()) {
        let spec = BarcodeSpec::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bits = random_bits(&mut rng, spec.coded_bits());
        let stream = modulate(&bits, &spec).unwrap();
        let back = demodulate(&stream.grays(&spec), &spec).unwrap();
        prop_assert_eq!(back.to_bits(&spec), bits);
    }

    #[test]
    fn layout_roundtrip(seed in any::<u64>(), layout_seed in any::<u64>()) {
        let spec = BarcodeSpec::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let stream = modulate(&random_bits(&mut rng, spec.coded_bits()), &spec).unwrap();
        let layout = GridLayout::new(&spec, layout_seed).unwrap();
        let grid = layout.assemble(&stream, &spec).unwrap();
        let (data, _) = layout.disassemble(&grid).unwrap();
        prop_assert_eq!(data, stream.grays(&spec));
    }

    #[test]
    fn embed_extract_inverse(seed in any::<u64>(), k_idx in 0usize..3, s2 in any::<bool>()) {
        let spec = BarcodeSpec::default();
        let strategy = if s2 { Strategy::Strategy2 } else { Strategy::Strategy1 };
        let cfg = AuthConfig::preset([147, 179, 247][k_idx], strategy).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let src = random_bits(&mut rng, spec.source_bits());
        let key = random_bits(&mut rng, 256);
        let loc = derive_locations(&src, &key, &cfg, &spec).unwrap();
        let mut sorted = loc.positions.clone();
        sorted.sort_unstable();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), cfg.n_a);
        let parity: Vec<_> = spec.parity_ranges().into_iter().flatten().collect();
        if s2 {
            prop_assert!(loc.positions.iter().all(|&p| p < spec.coded_bits()));
        } else {
            prop_assert!(loc.positions.iter().all(|p| parity.contains(p)));
        }
        let s_c2 = random_bits(&mut rng, spec.coded_bits());
        let s_a2 = random_bits(&mut rng, cfg.n_a);
        let s_e2 = embed(&s_c2, &s_a2, &loc).unwrap();
        prop_assert_eq!(extract(&s_e2, &loc).unwrap(), s_a2);
    }
}
