mod common;

use common::*;
use offload_core::energy::{edge_energy, plan_costs};
use offload_core::lagrangian::{
    component_lagrangian, initial_placement, lagrangian_value, nu_star, update_placement, Multipliers, OmegaForm,
};
use offload_core::profile::{parse_instance, InstanceFile};
use offload_core::{AppGraph, Instance};
use proptest::prelude::*;

fn scaled_data(inst: &Instance, factor: f64) -> Instance {
    let g = inst.graph();
    let data = g
        .data_matrix()
        .iter()
        .map(|row| row.iter().map(|d| d * factor).collect())
        .collect();
    let graph = AppGraph::new(
        g.alpha_matrix().to_vec(),
        data,
        g.local_times().to_vec(),
        g.cloud_times().to_vec(),
    )
    .unwrap();
    Instance::new(
        graph,
        inst.device().clone(),
        inst.radios().to_vec(),
        inst.t_req(),
        inst.pinned_local().iter().copied(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn costs_match_the_expansion(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, 7, 3);
        let plan = random_plan(&mut r, &inst);
        let costs = plan_costs(&inst, &plan).unwrap();
        let (e, t) = literal_totals(&inst, &plan);
        prop_assert!(rel_err(costs.energy, e) <= 1e-12);
        prop_assert!(rel_err(costs.time, t) <= 1e-12);
    }

    #[test]
    fn component_lagrangian_matches_the_expansion(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, 7, 3);
        let plan = random_plan(&mut r, &inst);
        let mult = random_multipliers(&mut r, &inst);
        for i in 0..inst.m() {
            let lib = component_lagrangian(&inst, &plan, &mult, i).unwrap();
            let lit = literal_component_lagrangian(&inst, &plan, &mult, i);
            prop_assert!((lib - lit).abs() <= 1e-12 * lib.abs().max(lit.abs()).max(1.0));
        }
    }

    #[test]
    fn zero_multipliers_give_the_energy(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, 8, 3);
        let plan = random_plan(&mut r, &inst);
        let zero = Multipliers::zero(inst.m(), inst.k());
        prop_assert_eq!(lagrangian_value(&inst, &plan, &zero).unwrap(), plan_costs(&inst, &plan).unwrap().energy);
    }

    #[test]
    fn split_rows_lie_in_the_simplex(seed in any::<u64>(), outside in any::<bool>()) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, 8, 3);
        let plan = random_plan(&mut r, &inst);
        let mult = random_multipliers(&mut r, &inst);
        let form = if outside { OmegaForm::PhiOutsideSum } else { OmegaForm::AsPrinted };
        let nu = nu_star(&inst, &plan, &mult, form).unwrap();
        for (i, row) in nu.iter().enumerate() {
            prop_assert!(row.iter().all(|v| *v >= 0.0));
            let sum: f64 = row.iter().sum();
            if plan.placement[i] || inst.graph().out_degree(i) == 0 {
                prop_assert_eq!(sum, 0.0);
            } else {
                prop_assert!((sum - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn doubling_data_doubles_transfer_terms(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, 6, 2).with_rtt_model(false);
        let doubled = scaled_data(&inst, 2.0);
        let plan = random_plan(&mut r, &inst);
        for i in 0..inst.m() {
            for j in 0..inst.m() {
                for k in 0..inst.k() {
                    let (a, b) = edge_energy(&inst, &plan, i, j, k).unwrap();
                    let (a2, b2) = edge_energy(&doubled, &plan, i, j, k).unwrap();
                    prop_assert!(rel_err(2.0 * a, a2) <= 1e-15 && rel_err(2.0 * b, b2) <= 1e-15);
                }
            }
        }
        let c = plan_costs(&inst, &plan).unwrap();
        let c2 = plan_costs(&doubled, &plan).unwrap();
        for (x, y) in c.per_component.iter().zip(&c2.per_component) {
            prop_assert!(rel_err(2.0 * x.t_com, y.t_com) <= 1e-14);
            prop_assert!(rel_err(2.0 * x.e_com, y.e_com) <= 1e-14);
            prop_assert_eq!(x.e_m, y.e_m);
        }
    }

    #[test]
    fn placements_agree_without_edges(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, 8, 2);
        let m = inst.m();
        let g = inst.graph();
        let graph = AppGraph::new(
            vec![vec![false; m]; m],
            vec![vec![0.0; m]; m],
            g.local_times().to_vec(),
            g.cloud_times().to_vec(),
        )
        .unwrap();
        let bare = Instance::new(graph, inst.device().clone(), inst.radios().to_vec(), inst.t_req(), [0]).unwrap();
        let plan = random_plan(&mut r, &bare);
        let mult = random_multipliers(&mut r, &bare);
        prop_assert_eq!(initial_placement(&bare, &mult), update_placement(&bare, &plan, &mult).unwrap());
    }

    #[test]
    fn instance_files_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        // the rtt model is a run option, not part of the file
        let inst = random_instance(&mut r, 8, 3).with_rtt_model(false);
        let inst = if seed % 4 == 0 { inst.with_t_req(f64::INFINITY).unwrap() } else { inst };
        let json = serde_json::to_string(&InstanceFile::from_instance(&inst)).unwrap();
        prop_assert_eq!(parse_instance(&json).unwrap(), inst);
    }
}
