//! Property tests for the word algebra and the operator layer.

use nalgebra::DVector;
use proptest::collection::vec;
use proptest::prelude::*;

use paulikern::algebra::{
    evaluate_formal_sum, sum_projector, truncated_expansion, verify_kernel_identity,
    DEFAULT_KERNEL_THRESHOLD,
};
use paulikern::models::random_ensemble;
use paulikern::operator::{hermitian_eig, projector_from_span, Operator, DEFAULT_RANK_TOL};
use paulikern::words::{
    binomial_expansion, count_layer, expansion_terms, formal_equal, recursion_step, reduce_word,
    Word,
};

proptest! {
    #[test]
    fn reduce_word_is_idempotent_and_canonical(
        letters in vec(1usize..=4, 0..24),
    ) {
        let once = reduce_word(&letters, 4).unwrap();
        let twice = reduce_word(once.letters(), 4).unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert!(once.letters().windows(2).all(|w| w[0] != w[1]));
    }

    #[test]
    fn concatenation_matches_reduction_of_concatenated_letters(
        a in vec(1usize..=3, 0..12),
        b in vec(1usize..=3, 0..12),
    ) {
        let wa = reduce_word(&a, 3).unwrap();
        let wb = reduce_word(&b, 3).unwrap();
        let joined: Vec<usize> = a.iter().chain(b.iter()).copied().collect();
        prop_assert_eq!(wa.concat(&wb), reduce_word(&joined, 3).unwrap());
    }

    #[test]
    fn expansion_identity_and_recursion(
        n in 1usize..=4,
        m in 1usize..=6,
    ) {
        prop_assert!(formal_equal(&expansion_terms(n, m), &binomial_expansion(n, m)).equal);
        prop_assert!(formal_equal(&recursion_step(n, m), &expansion_terms(n, m + 1)).equal);
        let layer = expansion_terms(n, m).layer(m);
        prop_assert_eq!(layer.num_terms() as u128, count_layer(n, m));
    }

    #[test]
    fn word_order_is_graded(
        a in vec(1usize..=4, 0..8),
        b in vec(1usize..=4, 0..8),
    ) {
        let wa = Word::reduce(&a, 4).unwrap();
        let wb = Word::reduce(&b, 4).unwrap();
        if wa.len() < wb.len() {
            prop_assert!(wa < wb);
        }
    }

    #[test]
    fn projector_from_span_invariant_under_scaling_and_order(
        seed in 0u64..500,
        scale in 0.1f64..10.0,
    ) {
        let set = random_ensemble(6, 2, &[2, 1], seed).unwrap();
        let p = set.get(0).unwrap();
        let vectors = p.span_vectors();
        let rescaled: Vec<DVector<f64>> = vectors
            .iter()
            .rev()
            .map(|v| v * scale)
            .collect();
        let q = projector_from_span(&rescaled, DEFAULT_RANK_TOL).unwrap();
        prop_assert_eq!(p.rank(), q.rank());
        let diff = p.op().try_sub(q.op()).unwrap().fro_norm();
        prop_assert!(diff <= 1e-10, "projector changed by {diff:e}");
    }

    #[test]
    fn eigendecomposition_reconstructs_projector_sums(seed in 0u64..300) {
        let set = random_ensemble(8, 3, &[2, 2, 1], seed).unwrap();
        let p = sum_projector(&set);
        let eig = hermitian_eig(&p).unwrap();
        // Spectrum bounds for a sum of N projectors.
        for &l in &eig.eigenvalues {
            prop_assert!(l >= -1e-10 && l <= set.len() as f64 + 1e-10);
        }
        // Residual contract per pair.
        for (k, &l) in eig.eigenvalues.iter().enumerate() {
            let v = eig.eigenvector(k);
            let residual = (&(p.matrix() * &v) - &v * l).norm();
            prop_assert!(residual <= 1e-10 * p.fro_norm().max(1.0));
        }
    }

    #[test]
    fn symbolic_and_numeric_routes_agree(seed in 0u64..200, m in 1usize..=5) {
        let set = random_ensemble(7, 3, &[1, 2, 1], seed).unwrap();
        let symbolic = evaluate_formal_sum(&expansion_terms(3, m), &set).unwrap();
        let numeric = truncated_expansion(&set, m as u32);
        let diff = symbolic.try_sub(&numeric).unwrap().fro_norm();
        prop_assert!(diff <= 1e-10 * set.dim() as f64);
    }

    #[test]
    fn kernel_dims_agree_between_routes(seed in 0u64..200) {
        let set = random_ensemble(9, 3, &[2, 2, 2], seed).unwrap();
        let t2 = verify_kernel_identity(&set, DEFAULT_KERNEL_THRESHOLD);
        prop_assert_eq!(t2.kernel_dim_sum, t2.kernel_dim_complete);
        prop_assert!(t2.complete_on_sum_kernel <= 1e-8);
        prop_assert!(t2.sum_on_complete_kernel <= 1e-8);
    }

    #[test]
    fn operator_json_roundtrips_exactly(
        entries in vec(-1e6f64..1e6, 9),
    ) {
        let a = Operator::from_row_major(3, &entries).unwrap();
        let text = serde_json::to_string(&a).unwrap();
        let back: Operator = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(a, back);
    }
}
