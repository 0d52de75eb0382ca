//! Property tests for the network calculus: randomized layer shapes and
//! weights, checking composition against sequential evaluation and the size
//! bookkeeping invariants.

use pidenet::relu_net::{compose, parallelize, Layer, ReluNetwork};
use proptest::prelude::*;

fn layer_strategy(in_dim: usize, out_dim: usize) -> impl Strategy<Value = Layer> {
    let entries = proptest::collection::vec(
        (0..out_dim as u32, 0..in_dim as u32, -2.0f64..2.0),
        0..=(in_dim * out_dim),
    );
    let bias = proptest::collection::vec(-1.0f64..1.0, out_dim);
    (entries, bias).prop_map(move |(entries, bias)| {
        Layer::from_entries(out_dim, in_dim, entries, bias).expect("valid layer")
    })
}

fn net_strategy(in_dim: usize, out_dim: usize) -> impl Strategy<Value = ReluNetwork> {
    proptest::collection::vec(1usize..=4, 0..=2).prop_flat_map(move |hidden| {
        let mut widths = vec![in_dim];
        widths.extend(hidden);
        widths.push(out_dim);
        let layers: Vec<_> = widths
            .windows(2)
            .map(|w| layer_strategy(w[0], w[1]))
            .collect();
        layers.prop_map(move |layers| ReluNetwork::new(in_dim, layers).expect("valid net"))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// compose realizes sequential evaluation and respects the refined
    /// size bound and the depth arithmetic.
    #[test]
    fn compose_is_sequential_eval(
        inner in net_strategy(3, 2),
        outer in net_strategy(2, 2),
        x in proptest::collection::vec(-3.0f64..3.0, 3),
    ) {
        let comp = compose(&outer, &inner).unwrap();
        prop_assert!(comp.size() <= 2 * outer.size() + inner.size_out() + inner.size());
        prop_assert_eq!(comp.depth(), outer.depth() + inner.depth() - 1);
        let want = outer.eval(&inner.eval(&x).unwrap()).unwrap();
        let got = comp.eval(&x).unwrap();
        for (a, b) in got.iter().zip(&want) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    /// parallelization is exactly size-additive and concatenates outputs.
    #[test]
    fn parallelize_is_size_additive(
        a in net_strategy(2, 2),
        b in net_strategy(3, 1),
        x in proptest::collection::vec(-3.0f64..3.0, 5),
    ) {
        // lift to a common depth first, as the calculus requires
        let maps = a.affine_maps().max(b.affine_maps());
        let a = pidenet::relu_net::lift_to_depth(&a, maps + 1).unwrap();
        let b = pidenet::relu_net::lift_to_depth(&b, maps + 1).unwrap();
        let par = parallelize(&[&a, &b], true).unwrap();
        prop_assert_eq!(par.size(), a.size() + b.size());
        let got = par.eval(&x).unwrap();
        let mut want = a.eval(&x[..2]).unwrap();
        want.extend(b.eval(&x[2..]).unwrap());
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() <= 1e-12 * (1.0 + w.abs()));
        }
    }

    /// the serialized form reproduces evaluations bit-exactly.
    #[test]
    fn serialization_round_trip(
        net in net_strategy(2, 2),
        x in proptest::collection::vec(-3.0f64..3.0, 2),
    ) {
        let back = ReluNetwork::from_json(&net.to_json()).unwrap();
        prop_assert_eq!(net.eval(&x).unwrap(), back.eval(&x).unwrap());
        prop_assert_eq!(net.size(), back.size());
    }
}
