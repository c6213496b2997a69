use crate::dynamics::{characteristic_flow, Trajectory};
use crate::error::{Error, Result};
use crate::spectral::State;
use crate::stochastics::WienerPath;

#[derive(Clone, Debug, PartialEq)]
pub struct TransportReport {
    /// sup over samples and flow times of |rho~(t, Phi) Phi_x - rho0|.
    pub residual: f64,
    pub rho0_sup: f64,
    pub min_phi_x: f64,
}

impl TransportReport {
    pub fn relative(&self) -> f64 {
        if self.rho0_sup > 0.0 {
            self.residual / self.rho0_sup
        } else {
            self.residual
        }
    }
}

/// Check that the transformed density rho~ = L^2 gamma~ is carried by the
/// characteristic flow: rho~(t, Phi(t,x)) Phi_x(t,x) = rho0(x).
pub fn transport_residual_of(
    times: &[f64],
    states: &[State],
    c: f64,
    path: Option<&WienerPath>,
    x_samples: &[f64],
) -> Result<TransportReport> {
    let flow = characteristic_flow(times, states, c, path, x_samples)?;
    let rho0 = states[0].density();
    let rho0_vals: Vec<f64> = x_samples.iter().map(|&x| rho0.eval_at(x)).collect();
    let mut residual: f64 = 0.0;
    let mut min_phi_x = f64::INFINITY;
    for (step, &idx) in flow.record_index.iter().enumerate() {
        let rho = states[idx].density();
        for ((&px, &x), &r0) in flow.phi_x[step].iter().zip(&flow.phi[step]).zip(&rho0_vals) {
            min_phi_x = min_phi_x.min(px);
            residual = residual.max((rho.eval_at(x) * px - r0).abs());
        }
    }
    Ok(TransportReport {
        residual,
        rho0_sup: rho0_vals.iter().fold(0.0, |m, v| m.max(v.abs())),
        min_phi_x,
    })
}

/// Transport check on a simulated trajectory kept with snapshots.
pub fn transport_residual(traj: &Trajectory, path: &WienerPath, x_samples: &[f64]) -> Result<TransportReport> {
    if traj.snapshots.len() != traj.records.len() || traj.snapshots.is_empty() {
        return Err(Error::param(
            "trajectory has no snapshots for every record; simulate with keep_states",
        ));
    }
    transport_residual_of(&traj.times(), &traj.snapshots, traj.transform_c, Some(path), x_samples)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::spectral::{Grid, SpectralField};

    fn samples(m: usize) -> Vec<f64> {
        (0..m).map(|i| 2.0 * PI * i as f64 / m as f64).collect()
    }

    #[test]
    fn still_velocity_leaves_density_in_place() {
        let g = Grid::new(1, 64).unwrap();
        let gamma = SpectralField::from_fn(&g, |x| (x[0]).cos() + 0.3 * (2.0 * x[0]).sin());
        let y = State::new_1d(SpectralField::zeros(&g), gamma).unwrap();
        let times: Vec<f64> = (0..11).map(|i| 0.1 * i as f64).collect();
        let states = vec![y; 11];
        let r = transport_residual_of(&times, &states, 0.0, None, &samples(32)).unwrap();
        assert!(r.residual < 1e-12);
        assert_eq!(r.min_phi_x, 1.0);
    }

    #[test]
    fn translation_is_transported_exactly() {
        let g = Grid::new(1, 64).unwrap();
        let v = 0.7;
        let times: Vec<f64> = (0..21).map(|i| 0.05 * i as f64).collect();
        let states: Vec<State> = times
            .iter()
            .map(|&t| {
                let gamma = SpectralField::from_fn(&g, |x| (x[0] - v * t).sin() + 0.2 * (3.0 * (x[0] - v * t)).cos());
                State::new_1d(SpectralField::constant(&g, v), gamma).unwrap()
            })
            .collect();
        let r = transport_residual_of(&times, &states, 0.0, None, &samples(40)).unwrap();
        assert!(r.relative() < 1e-8, "{}", r.relative());
        assert!((r.min_phi_x - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_two_dimensions() {
        let g = Grid::new(2, 16).unwrap();
        let y = State::zeros(&g);
        assert!(transport_residual_of(&[0.0, 1.0], &[y.clone(), y], 0.0, None, &[0.0]).is_err());
    }
}
