use nalgebra::{DMatrix, DVector};

use super::ThermalNetwork;
use crate::{Error, Result};

const RESIDUAL_TOLERANCE: f64 = 1e-9;
const MAX_ITERATIONS: usize = 200;

/// Net heat balance at each node: link inflow plus dissipation, W.
fn residual(network: &ThermalNetwork, temps: &[f64], boundary: f64, dissipation: &[f64]) -> Vec<f64> {
    let mut flows = vec![0.0; network.links().len()];
    let mut net = vec![0.0; temps.len()];
    network.link_flows(temps, boundary, &mut flows);
    network.net_heat(&flows, &mut net);
    net.iter().zip(dissipation).map(|(n, d)| n + d).collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Steady temperatures where every node's net heat balance vanishes.
///
/// Damped Newton iteration starting from the boundary temperature; heat
/// capacities play no part. Converges to a residual below 1e-9 W or fails
/// with [`Error::NumericFailure`].
pub fn steady_state(network: &ThermalNetwork, boundary: f64, dissipation: &[f64]) -> Result<Vec<f64>> {
    let n = network.nodes().len();
    if dissipation.len() != n {
        return Err(Error::InvalidInput(format!(
            "expected {n} dissipation values, got {}",
            dissipation.len()
        )));
    }
    if !(boundary > 0.0 && boundary.is_finite()) {
        return Err(Error::InvalidInput(format!("boundary temperature {boundary} K")));
    }

    let mut temps = vec![boundary; n];
    let mut res = residual(network, &temps, boundary, dissipation);
    let mut norm = max_abs(&res);
    let mut iterations = 0;

    while norm >= RESIDUAL_TOLERANCE {
        if iterations == MAX_ITERATIONS {
            return Err(Error::NumericFailure { iterations, residual: norm });
        }
        iterations += 1;

        // d(residual_i)/dT_j: a link A→B removes its flow from A and adds it to B.
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for (a, b, da, db) in network.link_jacobian_entries(&temps, boundary) {
            if let Some(i) = a {
                jac[(i, i)] -= da;
                if let Some(j) = b {
                    jac[(i, j)] -= db;
                }
            }
            if let Some(j) = b {
                jac[(j, j)] += db;
                if let Some(i) = a {
                    jac[(j, i)] += da;
                }
            }
        }
        let rhs = DVector::from_iterator(n, res.iter().map(|r| -r));
        let delta = jac
            .lu()
            .solve(&rhs)
            .ok_or(Error::NumericFailure { iterations, residual: norm })?;

        let mut damping = 1.0;
        loop {
            let trial: Vec<f64> = temps
                .iter()
                .zip(delta.iter())
                .map(|(t, d)| t + damping * d)
                .collect();
            if trial.iter().all(|t| *t > 0.0) {
                let trial_res = residual(network, &trial, boundary, dissipation);
                let trial_norm = max_abs(&trial_res);
                if trial_norm < norm || damping < 1e-6 {
                    temps = trial;
                    res = trial_res;
                    norm = trial_norm;
                    break;
                }
            }
            damping *= 0.5;
            if damping < 1e-12 {
                return Err(Error::NumericFailure { iterations, residual: norm });
            }
        }
    }
    Ok(temps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermal_network::{ThermalLink, ThermalNode, BOUNDARY};

    fn rc(dissipation: f64) -> (ThermalNetwork, Vec<f64>) {
        let net = ThermalNetwork::new(
            vec![ThermalNode::new("core", 100.0, 293.0)],
            vec![ThermalLink::conduction("wall", "core", BOUNDARY, 50.0)],
        )
        .unwrap();
        (net, vec![dissipation])
    }

    #[test]
    fn no_dissipation_sits_at_boundary() {
        let (net, d) = rc(0.0);
        assert_eq!(steady_state(&net, 241.0, &d).unwrap(), vec![241.0]);
    }

    #[test]
    fn single_node_offset() {
        let (net, d) = rc(0.09);
        let t = steady_state(&net, 241.0, &d).unwrap();
        assert!((t[0] - 245.5).abs() < 1e-9);
    }

    #[test]
    fn radiation_only_balance() {
        let c = 1e-9;
        let net = ThermalNetwork::new(
            vec![ThermalNode::new("plate", 1.0, 300.0)],
            vec![ThermalLink::radiation("r", "plate", BOUNDARY, c)],
        )
        .unwrap();
        let t = steady_state(&net, 150.0, &[2.0]).unwrap();
        let expected = (2.0 / c + 150.0_f64.powi(4)).powf(0.25);
        assert!((t[0] - expected).abs() < 1e-8);
    }

    #[test]
    fn capacity_independent() {
        let net = ThermalNetwork::new(
            vec![ThermalNode::new("a", 10.0, 300.0), ThermalNode::new("b", 30.0, 300.0)],
            vec![
                ThermalLink::conduction("ab", "a", "b", 4.0),
                ThermalLink::radiation("ab_r", "a", "b", 2e-10),
                ThermalLink::conduction("b_out", "b", BOUNDARY, 6.0),
                ThermalLink::radiation("b_sky", "b", BOUNDARY, 5e-10),
            ],
        )
        .unwrap();
        let d = [0.5, 0.1];
        let t1 = steady_state(&net, 200.0, &d).unwrap();
        let t2 = steady_state(&net.with_scaled_capacities(10.0).unwrap(), 200.0, &d).unwrap();
        for (a, b) in t1.iter().zip(&t2) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
