use restenosim_core::mesh::{structured_rectangle, Element, Mesh, Mode, RectangleSpec};
use restenosim_core::transport::*;

fn unit_square() -> Mesh {
    Mesh::new(
        Mode::Plane,
        vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        vec![Element::quad(0, 1, 2, 3)],
        vec![],
    )
    .unwrap()
}

fn strip(mode: Mode) -> Mesh {
    structured_rectangle(&RectangleSpec {
        length: 3.0,
        thickness: 0.6,
        nx: 12,
        ny: 4,
        mode,
        inner_offset: if mode == Mode::Axisymmetric { 1.5 } else { 0.0 },
    })
    .unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
}

#[test]
fn uptake_block_is_consistent_mass_on_unit_square() {
    let mesh = unit_square();
    let params = TransportParams {
        alpha: 1.0,
        ..TransportParams::default()
    };
    let state = FieldState::uniform(4, 0.0, 7e-9, 1.0);
    let em = element_matrices(&mesh, 0, &state, &params, None).unwrap();
    let expect = [
        [4.0, 2.0, 1.0, 2.0],
        [2.0, 4.0, 2.0, 1.0],
        [1.0, 2.0, 4.0, 2.0],
        [2.0, 1.0, 2.0, 4.0],
    ];
    for a in 0..4 {
        for b in 0..4 {
            assert!((em.p[a * 4 + b] - expect[a][b] / 36.0).abs() < 1e-15);
            assert!((em.m[a * 4 + b] - expect[a][b] / 36.0).abs() < 1e-15);
        }
    }
}

#[test]
fn uniform_ecm_gives_no_chemotaxis_and_zero_pdgf_no_proliferation() {
    let mesh = unit_square();
    let params = TransportParams::default();
    let mut state = FieldState::uniform(4, 1e-14, 7e-9, 3.16e6);
    let em = element_matrices(&mesh, 0, &state, &params, None).unwrap();
    // sum of shape gradients cancels to round-off
    let k_scale = params.chi * 1e-14 * 7e-9;
    assert!(em.k.iter().all(|&v| v.abs() < 1e-15 * k_scale));
    state.c_p = vec![0.0; 4];
    state.rho_e = vec![1e-9, 2e-9, 5e-9, 3e-9];
    let em = element_matrices(&mesh, 0, &state, &params, None).unwrap();
    assert!(em.q.iter().all(|&v| v == 0.0));
    assert!(em.k.iter().all(|&v| v == 0.0));
    let beta_term = params.beta * 3.16e6 / params.rho_e_th;
    for (t, m) in em.t.iter().zip(&em.m) {
        assert!(close(*t, beta_term * m, 1e-14));
    }
}

#[test]
fn chemotaxis_columns_sum_to_zero() {
    let mesh = strip(Mode::Axisymmetric);
    let params = TransportParams::default();
    let mut state = FieldState::uniform(mesh.node_count(), 0.0, 7e-9, 3.16e6);
    for (v, x) in mesh.coords.iter().enumerate() {
        state.c_p[v] = 1e-14 * (-(x[1] - 1.5).powi(2)).exp();
        state.rho_e[v] = 7e-9 * (0.5 + 0.1 * x[1]);
    }
    let ops = TransportOperators::assemble(&mesh, &state, &params, None).unwrap();
    let kt = ops.chemotaxis.transpose();
    let scale = ops
        .chemotaxis
        .values()
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    assert!(scale > 0.0);
    for s in kt.row_sums() {
        assert!(s.abs() < 1e-12 * scale);
    }
    // diffusion rows and columns both vanish on constants
    for s in ops.diffusion.row_sums() {
        assert!(s.abs() < 1e-14);
    }
}

fn single_dof_ops(state: &FieldState, params: &TransportParams) -> TransportOperators {
    TransportOperators::assemble(&unit_square(), state, params, None).unwrap()
}

#[test]
fn pdgf_halves_when_uptake_times_dt_is_one() {
    let params = TransportParams {
        alpha: 0.5,
        ..TransportParams::default()
    };
    let state = FieldState::uniform(4, 3e-14, 7e-9, 1.0);
    let ops = single_dof_ops(&state, &params);
    for opts in [
        TransportOptions::default(),
        TransportOptions {
            stabilization: Stabilization::None,
            ..TransportOptions::default()
        },
    ] {
        let c = step_pdgf(&ops, &state, 2.0, &opts, None).unwrap();
        for v in c {
            assert!(close(v, 1.5e-14, 1e-14));
        }
    }
    let zero = FieldState::uniform(4, 0.0, 7e-9, 1.0);
    let ops = single_dof_ops(&zero, &params);
    assert!(
        step_pdgf(&ops, &zero, 2.0, &TransportOptions::default(), None)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0)
    );
}

#[test]
fn ecm_single_dof_closed_forms() {
    let params = TransportParams::default();
    let dt = 1e-7;
    for mass in [EcmMass::Lumped, EcmMass::Consistent] {
        let opts = TransportOptions {
            ecm_mass: mass,
            ..TransportOptions::default()
        };
        // logistic approach without PDGF
        let (e0, rs) = (3e-9, 3.16e6);
        let state = FieldState::uniform(4, 0.0, e0, rs);
        let e1 = step_ecm(&single_dof_ops(&state, &params), &state, dt, &opts).unwrap();
        let b = params.beta * rs;
        let expect = (e0 + dt * b) / (1.0 + dt * b / params.rho_e_th);
        for v in e1 {
            assert!(close(v, expect, 1e-13), "{mass:?}: {v} vs {expect}");
            assert!(v > e0 && v <= params.rho_e_th);
        }
        // degradation only
        let p = TransportParams {
            beta: 0.0,
            ..params
        };
        let state = FieldState::uniform(4, 2e-14, e0, rs);
        let e1 = step_ecm(&single_dof_ops(&state, &p), &state, 0.3, &opts).unwrap();
        let expect = e0 / (1.0 + 0.3 * p.gamma * 2e-14);
        for v in e1 {
            assert!(close(v, expect, 1e-13));
        }
        // healed state is a fixed point
        let state = FieldState::uniform(4, 0.0, params.rho_e_th, rs);
        let e1 = step_ecm(&single_dof_ops(&state, &params), &state, 0.5, &opts).unwrap();
        for v in e1 {
            assert!(close(v, params.rho_e_th, 1e-15));
        }
    }
}

#[test]
fn smc_single_dof_closed_forms() {
    let (c, e) = (1e-14, 3.5e-9);
    let g = 1.0 - e / TransportParams::default().rho_e_th;
    let dt = 0.1;
    let params = TransportParams {
        kappa: 0.1 / (dt * c * g),
        ..TransportParams::default()
    };
    let state = FieldState::uniform(4, c, e, 3.16e6);
    let ops = single_dof_ops(&state, &params);
    for opts in [
        TransportOptions::default(),
        TransportOptions {
            stabilization: Stabilization::None,
            ..TransportOptions::default()
        },
    ] {
        let s = step_smc(&ops, &state, dt, &opts, None).unwrap();
        for v in s {
            assert!(close(v, 3.16e6 / 0.9, 1e-13), "{v}");
        }
    }
    // no chemotaxis and no proliferation leave the density untouched
    let frozen = TransportParams {
        chi: 0.0,
        kappa: 0.0,
        ..params
    };
    let mesh = strip(Mode::Plane);
    let mut state = FieldState::uniform(mesh.node_count(), c, e, 0.0);
    for (v, x) in mesh.coords.iter().enumerate() {
        state.rho_s[v] = 3.16e6 * (1.0 + 0.2 * x[0].sin());
        state.rho_e[v] = e * (1.0 + 0.1 * x[0]);
    }
    let ops = TransportOperators::assemble(&mesh, &state, &frozen, None).unwrap();
    let s = step_smc(&ops, &state, 0.05, &TransportOptions::default(), None).unwrap();
    for (a, b) in s.iter().zip(&state.rho_s) {
        assert!(close(*a, *b, 1e-14));
    }
}

#[test]
fn pdgf_mass_is_conserved_without_uptake_and_decays_with_it() {
    for mode in [Mode::Plane, Mode::Axisymmetric] {
        let mesh = strip(mode);
        let mut params = TransportParams {
            alpha: 0.0,
            ..TransportParams::default()
        };
        let mut state = FieldState::uniform(mesh.node_count(), 0.0, 7e-9, 3.16e6);
        let ax = mode.axial_axis();
        for (v, x) in mesh.coords.iter().enumerate() {
            state.c_p[v] = 1e-14 * (-(x[ax] - 1.5).powi(2) / 0.08).exp();
        }
        let m0 = integrate(&mesh, &state.c_p, None).unwrap();
        let mut s = state.clone();
        for _ in 0..5 {
            let ops = TransportOperators::assemble(&mesh, &s, &params, None).unwrap();
            s.c_p = step_pdgf(&ops, &s, 0.5, &TransportOptions::default(), None).unwrap();
        }
        let m1 = integrate(&mesh, &s.c_p, None).unwrap();
        assert!(((m1 - m0) / m0).abs() < 1e-10, "{mode:?}");
        params.alpha = 1e-7;
        let mut prev = m0;
        let mut s = state.clone();
        for _ in 0..5 {
            let ops = TransportOperators::assemble(&mesh, &s, &params, None).unwrap();
            s.c_p = step_pdgf(&ops, &s, 0.5, &TransportOptions::default(), None).unwrap();
            let m = integrate(&mesh, &s.c_p, None).unwrap();
            assert!(m <= prev);
            prev = m;
        }
    }
}

#[test]
fn smc_mass_conserved_by_chemotaxis_alone() {
    let mesh = strip(Mode::Axisymmetric);
    let params = TransportParams {
        kappa: 0.0,
        chi: 1e21,
        ..TransportParams::default()
    };
    let mut state = FieldState::uniform(mesh.node_count(), 0.0, 0.0, 3.16e6);
    for (v, x) in mesh.coords.iter().enumerate() {
        state.c_p[v] = 1e-14 * (-(x[1] - 1.5).powi(2) / 0.1).exp();
        state.rho_e[v] = 7e-9 * (0.3 + 0.2 * x[1]);
    }
    let ops = TransportOperators::assemble(&mesh, &state, &params, None).unwrap();
    let m0 = integrate(&mesh, &state.rho_s, None).unwrap();
    for opts in [
        TransportOptions::default(),
        TransportOptions {
            stabilization: Stabilization::None,
            ..TransportOptions::default()
        },
    ] {
        let s = step_smc(&ops, &state, 0.2, &opts, None).unwrap();
        let m1 = integrate(&mesh, &s, None).unwrap();
        assert!(((m1 - m0) / m0).abs() < 1e-10);
        assert!(s.iter().any(|&v| (v - 3.16e6).abs() > 1.0));
    }
}

#[test]
fn ecm_heals_monotonically_without_pdgf() {
    let mesh = strip(Mode::Plane);
    let params = TransportParams::default();
    let mut state = FieldState::uniform(mesh.node_count(), 0.0, 0.0, 3.16e6);
    for (v, x) in mesh.coords.iter().enumerate() {
        state.rho_e[v] = params.rho_e_th * (0.2 + 0.25 * x[0]).min(1.0);
        state.rho_s[v] = 3.16e6 * (1.0 + 0.3 * x[1]);
    }
    for _ in 0..10 {
        let next = transport_step(
            &mesh,
            None,
            &state,
            1e-8,
            &params,
            &TransportOptions::default(),
            &[],
        )
        .unwrap();
        for (a, b) in next.rho_e.iter().zip(&state.rho_e) {
            assert!(*a >= *b && *a <= params.rho_e_th);
        }
        next.check_invariants(&params).unwrap();
        state = next;
    }
}

#[test]
fn boundary_influx_adds_expected_amount() {
    let mesh = strip(Mode::Axisymmetric);
    let params = TransportParams {
        alpha: 0.0,
        ..TransportParams::default()
    };
    let state = FieldState::uniform(mesh.node_count(), 0.0, params.rho_e_th, params.rho_s_h);
    let influx = [BoundaryInflux {
        tag: "inner".into(),
        pdgf: 2e-15,
        smc: 0.0,
    }];
    let next = transport_step(
        &mesh,
        None,
        &state,
        0.1,
        &params,
        &TransportOptions::default(),
        &influx,
    )
    .unwrap();
    let added = integrate(&mesh, &next.c_p, None).unwrap();
    // inner surface area 2 pi r L
    let area = 2.0 * std::f64::consts::PI * 1.5 * 3.0;
    assert!(close(added, 0.1 * 2e-15 * area, 1e-10), "{added}");
}

#[test]
fn invalid_parameters_are_rejected() {
    let p = TransportParams {
        d_p: -1.0,
        ..TransportParams::default()
    };
    assert!(p.validate().is_err());
    assert!(TransportParams::default().validate().is_ok());
    let off = TransportParams {
        alpha: 0.0,
        chi: 0.0,
        ..TransportParams::default()
    };
    assert!(off.validate().is_ok());
    let negative = TransportParams {
        kappa: -1e-3,
        ..TransportParams::default()
    };
    assert!(negative.validate().is_err());
}
