mod common;

use common::*;

#[test]
fn splitting_on_small_trees() {
    splitting_suite(3, 4, 4).unwrap();
}

#[test]
fn flag_wave_reproduces_dalembert() {
    dalembert_suite().unwrap();
}

#[test]
fn tree_wave_traces_and_closed_form() {
    tree_wave_suite().unwrap();
}

#[test]
fn ode_against_integrator() {
    for seed in [3, 11] {
        ode_suite(seed).unwrap();
    }
}
