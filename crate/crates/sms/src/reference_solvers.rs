//! Ground-truth trajectory generators: RK4 for the Van der Pol and Lorenz
//! systems, leapfrog for the 1-D wave equation and FTCS for the 1-D heat
//! equation, all on uniform grids with homogeneous Dirichlet boundaries.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Result, SmsError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OdeSystem {
    VanDerPol { mu: f64 },
    Lorenz { sigma: f64, rho: f64, beta: f64 },
}

impl OdeSystem {
    pub fn dim(&self) -> usize {
        match self {
            OdeSystem::VanDerPol { .. } => 2,
            OdeSystem::Lorenz { .. } => 3,
        }
    }

    pub fn rhs(&self, state: &[f64], out: &mut [f64]) {
        match *self {
            OdeSystem::VanDerPol { mu } => {
                let (x, y) = (state[0], state[1]);
                out[0] = y;
                out[1] = mu * (1.0 - x * x) * y - x;
            }
            OdeSystem::Lorenz { sigma, rho, beta } => {
                let (x, y, z) = (state[0], state[1], state[2]);
                out[0] = sigma * (y - x);
                out[1] = x * (rho - z) - y;
                out[2] = x * y - beta * z;
            }
        }
    }
}

pub fn vdp_rhs(state: (f64, f64), mu: f64) -> (f64, f64) {
    let mut out = [0.0; 2];
    OdeSystem::VanDerPol { mu }.rhs(&[state.0, state.1], &mut out);
    (out[0], out[1])
}

pub fn lorenz_rhs(state: (f64, f64, f64), sigma: f64, rho: f64, beta: f64) -> (f64, f64, f64) {
    let mut out = [0.0; 3];
    OdeSystem::Lorenz { sigma, rho, beta }.rhs(&[state.0, state.1, state.2], &mut out);
    (out[0], out[1], out[2])
}

/// Uniform 1-D spatial grid including both endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub n_x: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_x: usize) -> Result<Self> {
        if n_x < 2 || !(x_max > x_min) {
            return Err(SmsError::InvalidConfig(format!(
                "grid needs x_max > x_min and n_x >= 2, got [{x_min},{x_max}] n_x={n_x}"
            )));
        }
        let dx = (x_max - x_min) / (n_x - 1) as f64;
        Ok(Grid1D { x_min, x_max, dx, n_x })
    }

    pub fn point(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_x).map(|i| self.point(i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryKind {
    Ode,
    Pde,
}

impl TrajectoryKind {
    fn name(&self) -> &'static str {
        match self {
            TrajectoryKind::Ode => "ode",
            TrajectoryKind::Pde => "pde",
        }
    }
}

/// Reference solution: row n holds the state (ODE) or field (PDE) at time
/// n * dt. Row 0 is the initial condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub kind: TrajectoryKind,
    pub dt: f64,
    pub rows: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.rows[n]
    }

    pub fn is_finite(&self) -> bool {
        self.rows.iter().all(|r| r.iter().all(|v| v.is_finite()))
    }

    /// Text format: header `# kind dt n_rows n_cols`, then one whitespace
    /// separated row per timestep with round-trip-safe floats.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(
            s,
            "# {} {} {} {}",
            self.kind.name(),
            self.dt,
            self.n_rows(),
            self.n_cols()
        )
        .unwrap();
        for row in &self.rows {
            let mut first = true;
            for v in row {
                if !first {
                    s.push(' ');
                }
                write!(s, "{v}").unwrap();
                first = false;
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Trajectory> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| SmsError::Parse("empty trajectory file".into()))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 5 || parts[0] != "#" {
            return Err(SmsError::Parse(format!("bad trajectory header: {header}")));
        }
        let kind = match parts[1] {
            "ode" => TrajectoryKind::Ode,
            "pde" => TrajectoryKind::Pde,
            other => return Err(SmsError::Parse(format!("unknown trajectory kind {other}"))),
        };
        let dt: f64 = parts[2]
            .parse()
            .map_err(|_| SmsError::Parse(format!("bad dt {}", parts[2])))?;
        let n_rows: usize = parts[3].parse().map_err(|_| SmsError::Parse("bad n_rows".into()))?;
        let n_cols: usize = parts[4].parse().map_err(|_| SmsError::Parse("bad n_cols".into()))?;
        let mut rows = Vec::with_capacity(n_rows);
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let row: std::result::Result<Vec<f64>, _> =
                line.split_whitespace().map(|t| t.parse::<f64>()).collect();
            let row = row.map_err(|e| SmsError::Parse(format!("bad float: {e}")))?;
            if row.len() != n_cols {
                return Err(SmsError::Parse(format!(
                    "row width {} does not match header {n_cols}",
                    row.len()
                )));
            }
            rows.push(row);
        }
        if rows.len() != n_rows {
            return Err(SmsError::Parse(format!(
                "row count {} does not match header {n_rows}",
                rows.len()
            )));
        }
        Ok(Trajectory { kind, dt, rows })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Trajectory> {
        Trajectory::from_text(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PdeKind {
    Wave { c: f64 },
    Heat { alpha: f64 },
}

/// 1-D PDE instance with homogeneous Dirichlet boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeProblem {
    pub kind: PdeKind,
    pub grid: Grid1D,
    pub ic_u: Vec<f64>,
    /// Initial velocity field, wave equation only.
    pub ic_v: Option<Vec<f64>>,
}

/// Classical 4-stage Runge-Kutta with fixed step.
pub fn rk4_integrate(
    system: &OdeSystem,
    state0: &[f64],
    dt: f64,
    n_steps: usize,
) -> Result<Trajectory> {
    if state0.iter().any(|v| !v.is_finite()) {
        return Err(SmsError::NonFinite("initial state".into()));
    }
    if !(dt > 0.0) || n_steps < 1 {
        return Err(SmsError::InvalidConfig(format!("dt={dt}, n_steps={n_steps}")));
    }
    let d = system.dim();
    assert_eq!(state0.len(), d);
    let mut rows = Vec::with_capacity(n_steps + 1);
    let mut u = state0.to_vec();
    rows.push(u.clone());
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d]);
    let mut tmp = vec![0.0; d];
    for _ in 0..n_steps {
        system.rhs(&u, &mut k1);
        for i in 0..d {
            tmp[i] = u[i] + 0.5 * dt * k1[i];
        }
        system.rhs(&tmp, &mut k2);
        for i in 0..d {
            tmp[i] = u[i] + 0.5 * dt * k2[i];
        }
        system.rhs(&tmp, &mut k3);
        for i in 0..d {
            tmp[i] = u[i] + dt * k3[i];
        }
        system.rhs(&tmp, &mut k4);
        for i in 0..d {
            u[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        rows.push(u.clone());
    }
    Ok(Trajectory {
        kind: TrajectoryKind::Ode,
        dt,
        rows,
    })
}

/// Second-order leapfrog for u_tt = c^2 u_xx with Dirichlet boundaries.
/// The first step is a Taylor start from u_0 and v_0.
pub fn solve_wave_leapfrog(problem: &PdeProblem, dt: f64, n_steps: usize) -> Result<Trajectory> {
    let c = match problem.kind {
        PdeKind::Wave { c } => c,
        _ => return Err(SmsError::InvalidConfig("expected a wave problem".into())),
    };
    let n_x = problem.grid.n_x;
    if n_x < 3 {
        return Err(SmsError::InvalidConfig("wave stencil needs n_x >= 3".into()));
    }
    let r2 = (c * dt / problem.grid.dx).powi(2);
    let zero_v = vec![0.0; n_x];
    let v0 = problem.ic_v.as_deref().unwrap_or(&zero_v);
    let mut rows = Vec::with_capacity(n_steps + 1);
    let mut prev = problem.ic_u.clone();
    prev[0] = 0.0;
    prev[n_x - 1] = 0.0;
    rows.push(prev.clone());
    if n_steps == 0 {
        return Ok(Trajectory {
            kind: TrajectoryKind::Pde,
            dt,
            rows,
        });
    }
    let mut cur = vec![0.0; n_x];
    for i in 1..n_x - 1 {
        cur[i] = prev[i]
            + dt * v0[i]
            + 0.5 * r2 * (prev[i + 1] - 2.0 * prev[i] + prev[i - 1]);
    }
    rows.push(cur.clone());
    let mut next = vec![0.0; n_x];
    for _ in 1..n_steps {
        for i in 1..n_x - 1 {
            next[i] = 2.0 * cur[i] - prev[i] + r2 * (cur[i + 1] - 2.0 * cur[i] + cur[i - 1]);
        }
        next[0] = 0.0;
        next[n_x - 1] = 0.0;
        rows.push(next.clone());
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(Trajectory {
        kind: TrajectoryKind::Pde,
        dt,
        rows,
    })
}

/// Forward-time centered-space scheme for u_t = alpha u_xx with Dirichlet
/// boundaries. Stability is the caller's concern.
pub fn solve_heat_ftcs(problem: &PdeProblem, dt: f64, n_steps: usize) -> Result<Trajectory> {
    let alpha = match problem.kind {
        PdeKind::Heat { alpha } => alpha,
        _ => return Err(SmsError::InvalidConfig("expected a heat problem".into())),
    };
    let n_x = problem.grid.n_x;
    if n_x < 3 {
        return Err(SmsError::InvalidConfig("heat stencil needs n_x >= 3".into()));
    }
    let r = alpha * dt / (problem.grid.dx * problem.grid.dx);
    let mut rows = Vec::with_capacity(n_steps + 1);
    let mut cur = problem.ic_u.clone();
    cur[0] = 0.0;
    cur[n_x - 1] = 0.0;
    rows.push(cur.clone());
    let mut next = vec![0.0; n_x];
    for _ in 0..n_steps {
        for i in 1..n_x - 1 {
            next[i] = cur[i] + r * (cur[i + 1] - 2.0 * cur[i] + cur[i - 1]);
        }
        next[0] = 0.0;
        next[n_x - 1] = 0.0;
        rows.push(next.clone());
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(Trajectory {
        kind: TrajectoryKind::Pde,
        dt,
        rows,
    })
}

/// Keep rows 0, m, 2m, ... and scale dt by m.
pub fn subsample(traj: &Trajectory, m: usize) -> Result<Trajectory> {
    if m < 1 {
        return Err(SmsError::InvalidConfig("subsample factor must be >= 1".into()));
    }
    if m >= traj.n_rows() {
        return Err(SmsError::TrajectoryTooShort(format!(
            "subsample by {m} on {} rows",
            traj.n_rows()
        )));
    }
    let rows = traj.rows.iter().step_by(m).cloned().collect();
    Ok(Trajectory {
        kind: traj.kind,
        dt: traj.dt * m as f64,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IcKind {
    Gaussian { center: f64, width: f64 },
    Hat,
}

/// Sample a closed-form initial condition on the grid nodes.
pub fn make_ic(kind: IcKind, grid: &Grid1D) -> Vec<f64> {
    grid.points()
        .map(|x| match kind {
            IcKind::Gaussian { center, width } => (-((x - center) / width).powi(2)).exp(),
            IcKind::Hat => {
                if x < 0.45 || x > 0.55 {
                    0.0
                } else if x < 0.5 {
                    20.0 * (x - 0.45)
                } else {
                    20.0 * (0.55 - x)
                }
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vdp_rhs_values() {
        assert_eq!(vdp_rhs((0.0, 0.0), 3.0), (0.0, 0.0));
        assert_eq!(vdp_rhs((1.0, 0.0), 2.0), (0.0, -1.0));
        // mu = 0 reduces to the harmonic oscillator
        assert_eq!(vdp_rhs((0.3, -0.7), 0.0), (-0.7, -0.3));
    }

    #[test]
    fn lorenz_rhs_values() {
        assert_eq!(lorenz_rhs((0.0, 0.0, 0.0), 10.0, 28.0, 8.0 / 3.0), (0.0, 0.0, 0.0));
        let (dx, dy, dz) = lorenz_rhs((1.0, 1.0, 1.0), 10.0, 28.0, 8.0 / 3.0);
        assert_eq!(dx, 0.0);
        assert_eq!(dy, 26.0);
        assert!((dz - (1.0 - 8.0 / 3.0)).abs() < 1e-15);
        // nontrivial fixed point
        let (s, r, b): (f64, f64, f64) = (10.0, 28.0, 8.0 / 3.0);
        let q = (b * (r - 1.0)).sqrt();
        let (dx, dy, dz) = lorenz_rhs((q, q, r - 1.0), s, r, b);
        assert!(dx.abs() < 1e-12 && dy.abs() < 1e-12 && dz.abs() < 1e-12);
    }

    #[test]
    fn rk4_harmonic_oscillator() {
        let traj = rk4_integrate(&OdeSystem::VanDerPol { mu: 0.0 }, &[1.0, 0.0], 0.004, 2500).unwrap();
        let mut max_err: f64 = 0.0;
        for (n, row) in traj.rows.iter().enumerate() {
            let t = n as f64 * 0.004;
            max_err = max_err.max((row[0] - t.cos()).abs());
        }
        assert!(max_err <= 1e-6, "max_err={max_err}");
    }

    #[test]
    fn rk4_fourth_order_convergence() {
        let err_at = |dt: f64, n: usize| {
            let traj = rk4_integrate(&OdeSystem::VanDerPol { mu: 0.0 }, &[1.0, 0.0], dt, n).unwrap();
            let mut max_err: f64 = 0.0;
            for (k, row) in traj.rows.iter().enumerate() {
                max_err = max_err.max((row[0] - (k as f64 * dt).cos()).abs());
            }
            max_err
        };
        let e1 = err_at(0.04, 250);
        let e2 = err_at(0.02, 500);
        let factor = e1 / e2;
        assert!((12.0..=20.0).contains(&factor), "factor={factor}");
    }

    #[test]
    fn rk4_lorenz_origin_stays_zero() {
        let sys = OdeSystem::Lorenz { sigma: 10.0, rho: 28.0, beta: 8.0 / 3.0 };
        let traj = rk4_integrate(&sys, &[0.0, 0.0, 0.0], 0.01, 100).unwrap();
        assert!(traj.rows.iter().all(|r| r.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn rk4_vdp_limit_cycle_bounded_and_step_refined() {
        let sys = OdeSystem::VanDerPol { mu: 2.0 };
        let coarse = rk4_integrate(&sys, &[1.0, 0.0], 0.004, 2500).unwrap();
        for row in coarse.rows.iter().skip(500) {
            assert!(row[0].abs() <= 3.0 && row[1].abs() <= 5.0);
        }
        // Independent finer integration must agree.
        let fine = rk4_integrate(&sys, &[1.0, 0.0], 0.0004, 25000).unwrap();
        let mut max_dev: f64 = 0.0;
        for n in 0..=2500 {
            let a = &coarse.rows[n];
            let b = &fine.rows[n * 10];
            max_dev = max_dev.max((a[0] - b[0]).abs().max((a[1] - b[1]).abs()));
        }
        assert!(max_dev <= 1e-4, "max_dev={max_dev}");
    }

    #[test]
    fn rk4_rejects_non_finite() {
        let res = rk4_integrate(&OdeSystem::VanDerPol { mu: 1.0 }, &[f64::NAN, 0.0], 0.01, 10);
        assert!(res.is_err());
    }

    fn wave_problem(n_x: usize) -> PdeProblem {
        let grid = Grid1D::new(0.0, 1.0, n_x).unwrap();
        let ic_u = make_ic(IcKind::Gaussian { center: 0.5, width: 0.05 }, &grid);
        PdeProblem { kind: PdeKind::Wave { c: 1.0 }, grid, ic_u, ic_v: None }
    }

    #[test]
    fn wave_zero_ic_stays_zero() {
        let grid = Grid1D::new(0.0, 1.0, 11).unwrap();
        let p = PdeProblem {
            kind: PdeKind::Wave { c: 1.0 },
            grid,
            ic_u: vec![0.0; 11],
            ic_v: None,
        };
        let traj = solve_wave_leapfrog(&p, 0.1, 20).unwrap();
        assert!(traj.rows.iter().all(|r| r.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn wave_magic_timestep_matches_dalembert() {
        // At c*dt/dx = 1 the grid solution is exact; compare against
        // u(x,t) = (u0(x-ct) + u0(x+ct)) / 2 before the pulse nears the walls.
        let p = wave_problem(101);
        let dt = p.grid.dx;
        let traj = solve_wave_leapfrog(&p, dt, 20).unwrap();
        let u0 = |x: f64| (-((x - 0.5) / 0.05f64).powi(2)).exp();
        let mut max_err: f64 = 0.0;
        for n in 0..=20 {
            let t = n as f64 * dt;
            for i in 1..100 {
                let x = p.grid.point(i);
                let exact = 0.5 * (u0(x - t) + u0(x + t));
                max_err = max_err.max((traj.rows[n][i] - exact).abs());
            }
        }
        assert!(max_err <= 1e-12, "max_err={max_err}");
    }

    #[test]
    fn wave_energy_stays_bounded() {
        let p = wave_problem(101);
        let dt = p.grid.dx;
        let traj = solve_wave_leapfrog(&p, dt, 1000).unwrap();
        let energy = |a: &[f64], b: &[f64]| {
            let mut e = 0.0;
            for i in 0..a.len() {
                let v = (b[i] - a[i]) / dt;
                e += v * v;
            }
            for i in 1..b.len() {
                let g = (b[i] - b[i - 1]) / p.grid.dx;
                e += g * g;
            }
            e
        };
        let e0 = energy(&traj.rows[0], &traj.rows[1]);
        for n in 1..1000 {
            let e = energy(&traj.rows[n], &traj.rows[n + 1]);
            assert!(e <= 2.0 * e0, "step {n}: e={e} e0={e0}");
        }
    }

    fn heat_problem() -> PdeProblem {
        let grid = Grid1D::new(0.0, 1.0, 101).unwrap();
        let ic_u = make_ic(IcKind::Hat, &grid);
        PdeProblem { kind: PdeKind::Heat { alpha: 1.0 }, grid, ic_u, ic_v: None }
    }

    #[test]
    fn heat_maximum_principle_at_stable_step() {
        let p = heat_problem();
        let dt = 0.4 * p.grid.dx * p.grid.dx; // r = 0.4
        let traj = solve_heat_ftcs(&p, dt, 500).unwrap();
        let mut prev_max = f64::INFINITY;
        for row in &traj.rows {
            let m = row.iter().cloned().fold(f64::MIN, f64::max);
            assert!(m <= prev_max + 1e-14);
            assert!(row.iter().all(|&v| v >= -1e-14));
            prev_max = m;
        }
    }

    #[test]
    fn heat_blows_up_above_stability_limit() {
        let p = heat_problem();
        let dt = 4.0 * p.grid.dx * p.grid.dx; // r = 4.0
        let traj = solve_heat_ftcs(&p, dt, 20).unwrap();
        let max_abs = traj
            .rows
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0f64, |a, &v| a.max(v.abs()));
        assert!(max_abs > 1e3, "max_abs={max_abs}");
    }

    #[test]
    fn subsample_counts() {
        let sys = OdeSystem::VanDerPol { mu: 2.0 };
        let traj = rk4_integrate(&sys, &[1.0, 0.0], 0.004, 2500).unwrap();
        let sub = subsample(&traj, 10).unwrap();
        assert_eq!(sub.n_rows(), 251); // 250 retained steps
        assert_eq!(sub.dt, 0.04);
        assert_eq!(subsample(&traj, 1).unwrap(), traj);
        // composition
        let a = subsample(&subsample(&traj, 2).unwrap(), 5).unwrap();
        let b = subsample(&traj, 10).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn make_ic_values() {
        let grid = Grid1D::new(0.0, 1.0, 101).unwrap();
        let g = make_ic(IcKind::Gaussian { center: 0.5, width: 0.05 }, &grid);
        assert_eq!(g[50], 1.0);
        let h = make_ic(IcKind::Hat, &grid);
        assert!((h[50] - 1.0).abs() < 1e-12); // 20*(0.5-0.45)
        assert_eq!(h[30], 0.0);
        assert_eq!(h[99], 0.0);
    }

    #[test]
    fn trajectory_text_round_trip() {
        let sys = OdeSystem::Lorenz { sigma: 10.0, rho: 28.0, beta: 8.0 / 3.0 };
        let traj = rk4_integrate(&sys, &[1.0, 1.0, 1.0], 0.01, 50).unwrap();
        let back = Trajectory::from_text(&traj.to_text()).unwrap();
        assert_eq!(traj, back);
    }
}
