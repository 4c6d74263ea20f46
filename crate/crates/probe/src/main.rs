use rand_chacha::rand_core::SeedableRng;
use siegel_core::cohomology::*;
fn main() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
    for (d, g, k) in [(2usize, 2usize, 0usize), (3, 3, 1), (2, 3, 0)] {
        let t = HermiteTruncation::new(g, 16, 1.0).unwrap();
        let omega = siegel_core::cohomology::test_support::random_form(&mut rng, d, k, t, 14).unwrap();
        let dd = differential(&differential(&omega).unwrap()).unwrap();
        println!("d={d} g={g} k={k}: ||ddw|| = {:.3e}, ||w|| = {:.3e}", dd.l2_norm(), omega.l2_norm());
    }
}
