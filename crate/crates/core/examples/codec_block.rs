//! Delta compression of MARS words, block packing and random access through
//! the markers.
//!
//! ```bash
//! cargo run --example codec_block
//! ```

use burstlab::codec::{compress_block, compressed_len, decompress_seek, read_block, seek_mars, write_block};

fn main() -> burstlab::Result<()> {
    let n = 18;
    let smooth: Vec<u64> = (0..40).map(|i| 1000 + 3 * i).collect();
    let noisy: Vec<u64> = (0..12).map(|i| (i * 40503) % (1 << n)).collect();
    let single = vec![7u64];

    for (name, words) in [("smooth", &smooth), ("noisy", &noisy), ("single", &single)] {
        let bits = compressed_len(words, n);
        println!(
            "{name:>7}: {} words, {} bits packed, {} bits compressed",
            words.len(),
            words.len() * n as usize,
            bits
        );
    }

    let block = compress_block(&[smooth.clone(), noisy.clone(), single.clone()], n, 64);
    for (k, m) in block.markers.iter().enumerate() {
        let (bus_words, skip) = seek_mars(&block, k)?;
        println!(
            "mars {k}: marker ({}, {}), fetch bus words {bus_words:?}, skip {skip} bits",
            m.coarse, m.fine
        );
    }
    assert_eq!(decompress_seek(&block, 1)?, noisy);

    let bytes = write_block(&block);
    let back = read_block(&bytes)?;
    assert_eq!(back.decompress_all()?, vec![smooth, noisy, single]);
    println!("block file: {} bytes, roundtrip ok", bytes.len());
    Ok(())
}
