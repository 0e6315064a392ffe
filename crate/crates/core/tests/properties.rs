mod common;

use burstlab::codec::{
    compress_block, compress_mars, compressed_len, decompress_mars, decompress_seek, header_bits, read_block,
    write_block, BitStream,
};
use burstlab::kernel::{preset, preset_names};
use burstlab::layout::{
    build_weights, count_read_bursts, solve_layout_exact, solve_layout_greedy, LayoutOrder, WeightMatrix,
};
use burstlab::mars::{verify_partition, TileIOSummary};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn symmetric_weights(max_n: usize) -> impl Strategy<Value = Vec<Vec<u32>>> {
    (1..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(0u32..4, n * n).prop_map(move |v| {
            let mut w = vec![vec![0; n]; n];
            for i in 0..n {
                for j in i + 1..n {
                    w[i][j] = v[i * n + j];
                    w[j][i] = v[i * n + j];
                }
            }
            w
        })
    })
}

fn words(n: u32) -> impl Strategy<Value = Vec<u64>> {
    let m = common::mask(n);
    proptest::collection::vec(
        prop_oneof![
            any::<u64>().prop_map(move |x| x & m),
            Just(0),
            Just(m),
            Just(m >> 1),
            (0u64..8).prop_map(move |x| x & m)
        ],
        0..40,
    )
}

fn width_and_words() -> impl Strategy<Value = (u32, Vec<u64>)> {
    prop_oneof![
        Just(1u32),
        Just(4),
        Just(12),
        Just(17),
        Just(18),
        Just(32),
        Just(63),
        Just(64)
    ]
    .prop_flat_map(|n| (Just(n), words(n)))
}

proptest! {
    #[test]
    fn exact_layout_matches_permutation_search(w in symmetric_weights(8)) {
        let m = WeightMatrix::from_rows(&w);
        let exact = solve_layout_exact(&m).unwrap();
        prop_assert_eq!(exact.objective, common::brute_max_path(&w));
        prop_assert_eq!(exact.objective, common::path_weight(&w, &exact.order));
        let mut sorted = exact.order.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..w.len()).collect::<Vec<_>>());
    }

    #[test]
    fn greedy_never_beats_exact(w in symmetric_weights(9)) {
        let m = WeightMatrix::from_rows(&w);
        let greedy = solve_layout_greedy(&m);
        prop_assert!(greedy.objective <= solve_layout_exact(&m).unwrap().objective);
        prop_assert_eq!(greedy.objective, common::path_weight(&w, &greedy.order));
    }

    #[test]
    fn codec_roundtrip((n, ws) in width_and_words()) {
        let s = compress_mars(&ws, n);
        prop_assert_eq!(s.len(), compressed_len(&ws, n));
        prop_assert_eq!(s.len() as u64, common::token_sum(&ws, n));
        prop_assert_eq!(decompress_mars(&s, 0, n, ws.len()).unwrap(), ws.clone());
        let bound = n as usize + header_bits(n) as usize + 1;
        prop_assert!(s.len() <= ws.len() * bound);
    }

    #[test]
    fn block_seek_and_file_roundtrip(
        (n, mars) in prop_oneof![Just(12u32), Just(18), Just(64)]
            .prop_flat_map(|n| (Just(n), proptest::collection::vec(words(n).prop_filter("non-empty", |w| !w.is_empty()), 1..6))),
        log_w in 3u32..9,
    ) {
        let block = compress_block(&mars, n, 1 << log_w);
        for (k, m) in mars.iter().enumerate() {
            prop_assert_eq!(&decompress_seek(&block, k).unwrap(), m);
        }
        prop_assert_eq!(block.stream.len() % (1 << log_w), 0);
        let back = read_block(&write_block(&block)).unwrap();
        prop_assert_eq!(back.decompress_all().unwrap(), mars);
    }

    #[test]
    fn bitstream_fields(fields in proptest::collection::vec((any::<u64>(), 0u32..=64), 0..30)) {
        let mut s = BitStream::new();
        let fields: Vec<(u64, u32)> = fields.iter().map(|&(v, b)| (if b == 0 { 0 } else { v & common::mask(b) }, b)).collect();
        for &(v, b) in &fields {
            s.push(v, b);
        }
        let mut pos = 0;
        for &(v, b) in &fields {
            prop_assert_eq!(s.read(pos, b).unwrap(), v);
            pos += b as usize;
        }
        prop_assert!(s.read(pos, 1).is_err());
    }

    #[test]
    fn random_kernels_partition_and_duality(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (k, ts) = common::random_kernel(&mut rng);
        let summary = TileIOSummary::analyze(&ts, &k).unwrap();
        prop_assert!(verify_partition(&summary, &ts, &k).unwrap().ok);

        let brute = common::brute_mars(&ts, &k);
        prop_assert_eq!(summary.outputs.len(), brute.len());
        prop_assert_eq!(summary.inputs.len(), common::brute_input_mars(&ts, &k));

        let w = build_weights(&summary.outputs);
        let identity = LayoutOrder::identity(&w);
        prop_assert_eq!(count_read_bursts(&identity, &summary).total, common::brute_bursts(&identity, &summary));
        let total = summary.inputs.len();
        prop_assert_eq!(count_read_bursts(&identity, &summary).total, total - identity.objective as usize);
    }
}

#[test]
fn presets_partition_cleanly() {
    for name in preset_names() {
        let p = preset(name).unwrap();
        for sizes in p.tile_sizes {
            let ts = p.with_tile(sizes).unwrap();
            let s = TileIOSummary::analyze(&ts, &p.kernel).unwrap();
            let report = verify_partition(&s, &ts, &p.kernel).unwrap();
            assert!(report.ok, "{name} {sizes:?}: {:?}", report.violations);
            assert_eq!(
                s.outputs.len(),
                common::brute_mars(&ts, &p.kernel).len(),
                "{name} {sizes:?}"
            );
        }
    }
}
