//! Cell images and path words survive serialization unchanged.

use lambdam::kvy::{
    decode_path_bits, emit_image, encode_path_bits, image_to_term, load_image, parse_kvy,
    print_kvy, serialize_image,
};
use rand::rngs::StdRng;
use rand::SeedableRng;
use testkit::terms::{all_paths, kvy_term, multipath};

#[test]
fn images_roundtrip_bit_exact() {
    let mut rng = StdRng::seed_from_u64(0x1a6e);
    for _ in 0..200 {
        let t = kvy_term(&mut rng, 7, true);
        let img = emit_image(&t).unwrap();
        let bytes = serialize_image(&img);
        let back = load_image(&bytes).unwrap();
        assert_eq!(back, img);
        assert_eq!(serialize_image(&back), bytes);
        assert_eq!(image_to_term(&back).unwrap(), t);
    }
}

#[test]
fn assembler_text_roundtrips() {
    let mut rng = StdRng::seed_from_u64(0x7e47);
    for _ in 0..200 {
        let t = kvy_term(&mut rng, 7, true);
        assert_eq!(parse_kvy(&print_kvy(&t)).unwrap(), t);
    }
}

#[test]
fn all_short_paths_roundtrip() {
    let paths = all_paths(8);
    assert!(paths.len() > 1000);
    for p in paths {
        assert_eq!(decode_path_bits(encode_path_bits(&p).unwrap()).unwrap(), p);
    }
}

#[test]
fn random_long_paths_roundtrip() {
    let mut rng = StdRng::seed_from_u64(0x9a75);
    for _ in 0..10_000 {
        let p = multipath(&mut rng, 32);
        assert!(p.token_count() <= 32);
        assert_eq!(decode_path_bits(encode_path_bits(&p).unwrap()).unwrap(), p);
    }
}
