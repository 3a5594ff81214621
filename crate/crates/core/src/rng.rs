use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seeded ChaCha stream keyed by a label (e.g. a language code) and a salt
/// (e.g. a sample size), so that each language's draw does not depend on
/// which other languages are present.
pub fn stream(seed: u64, label: &str, salt: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    rng.set_stream(fnv1a(label.as_bytes()));
    rng
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}
