mod common;

use common::*;
use gnnseed::gcn::{cross_entropy_loss, dmon_loss, gcn_backward, gcn_forward, GcnModel};
use proptest::prelude::*;

const STEP: f64 = 1e-5;
const TOL: f64 = 1e-4;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn dmon_gradient_in_zhat((g, z, _, _) in gcn_instance(10, 3)) {
        let (_, analytic) = dmon_loss(&g, z.view()).unwrap();
        let numeric = numeric_gradient(&z, STEP, |x| dmon_loss(&g, x.view()).unwrap().0);
        prop_assert!(relative_error(&analytic, &numeric) < TOL);
    }

    #[test]
    fn cross_entropy_gradient_in_zhat((g, z, _, y) in gcn_instance(10, 3)) {
        let mask: Vec<usize> = (0..g.n()).step_by(2).collect();
        let (_, analytic) = cross_entropy_loss(z.view(), &y, &mask).unwrap();
        let numeric = numeric_gradient(&z, STEP, |x| cross_entropy_loss(x.view(), &y, &mask).unwrap().0);
        prop_assert!(relative_error(&analytic, &numeric) < TOL);
        for i in (1..g.n()).step_by(2) {
            prop_assert!(analytic.row(i).iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn end_to_end_weight_gradients((g, z0, model, y) in gcn_instance(10, 3)) {
        prop_assume!(smooth_at(&g, &z0, &model));
        let s = g.normalized_adjacency();
        let mask: Vec<usize> = (0..g.n()).collect();
        let losses: [LossFn; 2] = [
            &|zhat| dmon_loss(&g, zhat.view()).unwrap(),
            &|zhat| cross_entropy_loss(zhat.view(), &y, &mask).unwrap(),
        ];
        for loss in losses {
            let (zhat, trace) = gcn_forward(&s, z0.view(), &model).unwrap();
            let grads = gcn_backward(&s, &trace, &model, loss(&zhat).1.view()).unwrap();
            let eval = |m: &GcnModel| loss(&gcn_forward(&s, z0.view(), m).unwrap().0).0;
            let n0 = numeric_gradient(&model.w0, STEP, |w| eval(&GcnModel { w0: w.clone(), w1: model.w1.clone() }));
            let n1 = numeric_gradient(&model.w1, STEP, |w| eval(&GcnModel { w0: model.w0.clone(), w1: w.clone() }));
            prop_assert!(relative_error(&grads.w0, &n0) < TOL);
            prop_assert!(relative_error(&grads.w1, &n1) < TOL);
        }
    }
}
