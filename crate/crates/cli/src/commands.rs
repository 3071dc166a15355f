//! Subcommand implementations. Each writes its artifacts into the configured
//! output directory and reports whether every solve converged.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use wigner_core::exact::{harmonic_coefficients, hooke_coefficients, hydrogen_coefficients};
use wigner_core::fem1d::Mesh1D;
use wigner_core::hermite::{evaluate_wigner, CoefficientSet};
use wigner_core::potentials::dft::{scf_solve, DftState};
use wigner_core::potentials::{Harmonic, HookeKs, Hydrogen1d, Potential};
use wigner_core::schrodinger::{lowest_states, Parity, SchrodingerKs, SchrodingerProblem};
use wigner_core::solver::{run_itp, StateEnsemble, WignerKs};

use crate::config::{InnerSolver, RunConfig, System};
use crate::error::{CliError, Result};
use crate::output::{ensure_dir, float, read_numeric_csv, write_csv, write_text};
use crate::report::{ConvergenceReport, ConvergenceRow};

/// What a command produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub converged: bool,
    pub files: Vec<PathBuf>,
}

/// Potential of the configured system. For `contact_hooke` this is the
/// external trap only.
pub fn potential(config: &RunConfig) -> Result<Arc<dyn Potential>> {
    Ok(match config.system {
        System::Harmonic | System::ContactHooke => Arc::new(Harmonic::new(config.omega)?),
        System::Hydrogen1d => Arc::new(Hydrogen1d),
        System::HookeKs => Arc::new(HookeKs),
    })
}

fn coefficient_header(truncation: usize) -> Vec<String> {
    (0..=truncation).map(|k| format!("f_{}", 2 * k)).collect()
}

fn state_rows(states: &[CoefficientSet]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for (index, f) in states.iter().enumerate() {
        for (i, x) in f.mesh().nodes().iter().enumerate() {
            let mut row = vec![index.to_string(), float(*x)];
            row.extend(f.coeffs().iter().map(|c| float(c[i])));
            rows.push(row);
        }
    }
    rows
}

/// `state.csv`: `state,x,f_0,f_2,…,f_2K`, one row per state and node.
pub fn write_states(path: &Path, states: &[CoefficientSet]) -> Result<()> {
    let truncation = states.first().map_or(0, |f| f.truncation());
    let mut header = vec!["state".to_string(), "x".to_string()];
    header.extend(coefficient_header(truncation));
    write_csv(path, &header, state_rows(states))
}

/// Reads one state back from a `state.csv`, checking its nodes against `mesh`.
pub fn read_state(path: &Path, mesh: Arc<Mesh1D>, index: usize) -> Result<CoefficientSet> {
    let bad = |reason: String| CliError::Input {
        path: path.to_path_buf(),
        reason,
    };
    let (header, rows) = read_numeric_csv(path)?;
    if header.len() < 3 || header[0] != "state" || header[1] != "x" {
        return Err(bad("expected a state.csv header `state,x,f_0,...`".into()));
    }
    let n_coeffs = header.len() - 2;
    let rows: Vec<_> = rows.into_iter().filter(|r| r[0] == index as f64).collect();
    if rows.len() != mesh.n_basis() {
        return Err(bad(format!(
            "state {index} has {} nodes, the configured mesh has {}",
            rows.len(),
            mesh.n_basis()
        )));
    }
    let scale = mesh.half_width();
    for (row, x) in rows.iter().zip(mesh.nodes()) {
        if (row[1] - x).abs() > 1e-12 * scale {
            return Err(bad(format!(
                "node x = {} does not match the configured mesh ({x})",
                row[1]
            )));
        }
    }
    let coeffs = (0..n_coeffs).map(|k| rows.iter().map(|r| r[k + 2]).collect()).collect();
    Ok(CoefficientSet::new(mesh, coeffs)?)
}

/// `manifest.ini`: the resolved config, re-executable with `--config`,
/// preceded by comment lines describing the run.
pub fn write_manifest(dir: &Path, config: &RunConfig, command: &str, converged: bool) -> Result<PathBuf> {
    let path = dir.join("manifest.ini");
    let text = format!(
        "; wigner run manifest\n; command = {command}\n; version = {}\n; seed = {}\n; converged = {converged}\n\n{}",
        env!("CARGO_PKG_VERSION"),
        config.solver.seed,
        config.to_ini(false)
    );
    write_text(&path, &text)?;
    Ok(path)
}

fn require_not_scf(config: &RunConfig, command: &str) -> Result<()> {
    if config.system == System::ContactHooke {
        return Err(CliError::Usage(format!(
            "`{command}` does not apply to contact_hooke, which is solved self-consistently; use `scf`"
        )));
    }
    Ok(())
}

/// Single Wigner solve; writes `state.csv`, `energies.csv`, `trace.csv` and
/// `manifest.ini`.
pub fn cmd_solve(config: &RunConfig) -> Result<Outcome> {
    require_not_scf(config, "solve")?;
    let run = run_itp(&config.solver, potential(config)?.as_ref())?;
    let dir = &config.output_dir;
    ensure_dir(dir)?;
    let state = dir.join("state.csv");
    write_states(&state, &run.states)?;
    let energies = dir.join("energies.csv");
    write_csv(
        &energies,
        &["state".into(), "energy".into(), "rayleigh".into()],
        run.energies
            .iter()
            .zip(&run.rayleigh)
            .enumerate()
            .map(|(i, (e, r))| vec![i.to_string(), float(*e), float(*r)]),
    )?;
    let trace = dir.join("trace.csv");
    write_trace(&trace, &run)?;
    let manifest = write_manifest(dir, config, "solve", run.converged)?;
    Ok(Outcome {
        converged: run.converged,
        files: vec![state, energies, trace, manifest],
    })
}

fn write_trace(path: &Path, run: &StateEnsemble) -> Result<()> {
    let mut header = vec!["iteration".to_string(), "tau".to_string(), "err".to_string()];
    header.extend((0..run.states.len()).map(|i| format!("energy_{i}")));
    write_csv(
        path,
        &header,
        run.trace.iter().map(|r| {
            let mut row = vec![r.iteration.to_string(), float(r.tau), float(r.err)];
            row.extend(r.energies.iter().map(|e| float(*e)));
            row
        }),
    )
}

/// Self-consistent Kohn–Sham run for `contact_hooke` with the configured
/// inner solver.
pub fn run_scf(config: &RunConfig, inner: InnerSolver) -> Result<(DftState, Option<CoefficientSet>)> {
    if config.system != System::ContactHooke {
        return Err(CliError::Usage(format!(
            "`scf` needs system = contact_hooke, got {}",
            config.system
        )));
    }
    let external = potential(config)?;
    match inner {
        InnerSolver::Wigner => {
            let mut ks = WignerKs::new(config.solver.clone(), external)?;
            let state = scf_solve(&mut ks, &config.scf)?;
            Ok((state, ks.state().cloned()))
        }
        InnerSolver::Schrodinger => {
            let mut ks = SchrodingerKs::new(config.solver.mesh()?, external);
            Ok((scf_solve(&mut ks, &config.scf)?, None))
        }
    }
}

/// SCF run; writes `density.csv`, `scf_history.csv`, `energies.csv`,
/// `manifest.ini` and, for the Wigner inner solver, `state.csv`.
pub fn cmd_scf(config: &RunConfig) -> Result<Outcome> {
    scf_with(config, config.inner, "scf")
}

fn scf_with(config: &RunConfig, inner: InnerSolver, command: &str) -> Result<Outcome> {
    let (state, coefficients) = run_scf(config, inner)?;
    let dir = &config.output_dir;
    ensure_dir(dir)?;
    let mesh = config.solver.mesh()?;
    let mut files = Vec::new();

    let density = dir.join("density.csv");
    write_csv(
        &density,
        &["x", "density", "v_h", "v_x", "v_c"].map(String::from),
        mesh.nodes().iter().enumerate().map(|(i, x)| {
            vec![
                float(*x),
                float(state.density[i]),
                float(state.v_h[i]),
                float(state.v_x[i]),
                float(state.v_c[i]),
            ]
        }),
    )?;
    files.push(density);

    let history = dir.join("scf_history.csv");
    write_csv(
        &history,
        &["iteration", "delta", "epsilon", "energy"].map(String::from),
        state.history.iter().map(|r| {
            vec![
                r.iteration.to_string(),
                float(r.delta),
                float(r.epsilon),
                float(r.energy),
            ]
        }),
    )?;
    files.push(history);

    let energies = dir.join("energies.csv");
    write_csv(
        &energies,
        &["inner", "epsilon", "energy", "iterations"].map(String::from),
        [vec![
            inner.name().to_string(),
            float(state.epsilon),
            float(state.energy),
            state.iterations().to_string(),
        ]],
    )?;
    files.push(energies);

    if let Some(f) = coefficients {
        let path = dir.join("state.csv");
        write_states(&path, &[f])?;
        files.push(path);
    }
    let mut resolved = config.clone();
    resolved.inner = inner;
    files.push(write_manifest(dir, &resolved, command, state.converged)?);
    Ok(Outcome {
        converged: state.converged,
        files,
    })
}

/// Finite-element Schrödinger solve of the same system. `contact_hooke` runs
/// the SCF loop with the Schrödinger inner solver.
pub fn cmd_reference(config: &RunConfig) -> Result<Outcome> {
    if config.system == System::ContactHooke {
        return scf_with(config, InnerSolver::Schrodinger, "reference");
    }
    let mesh = config.solver.mesh()?;
    let mut prob = SchrodingerProblem::new(mesh.clone(), potential(config)?, config.solver.n_states);
    prob.pin_origin = config.solver.pin_origin;
    if config.solver.pin_origin && config.solver.enforce_even {
        prob.parity = Parity::Even;
    }
    let pairs = lowest_states(&prob)?;
    let dir = &config.output_dir;
    ensure_dir(dir)?;
    let orbitals = dir.join("orbitals.csv");
    let mut rows = Vec::new();
    for (index, psi) in pairs.orbitals.iter().enumerate() {
        for (x, v) in mesh.nodes().iter().zip(psi) {
            rows.push(vec![index.to_string(), float(*x), float(*v), float(v * v)]);
        }
    }
    write_csv(&orbitals, &["state", "x", "psi", "density"].map(String::from), rows)?;
    let energies = dir.join("energies.csv");
    write_csv(
        &energies,
        &["state", "energy", "residual"].map(String::from),
        pairs
            .energies
            .iter()
            .zip(&pairs.residuals)
            .enumerate()
            .map(|(i, (e, r))| vec![i.to_string(), float(*e), float(*r)]),
    )?;
    let manifest = write_manifest(dir, config, "reference", pairs.converged)?;
    Ok(Outcome {
        converged: pairs.converged,
        files: vec![orbitals, energies, manifest],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceKind {
    /// Closed-form coefficient functions of the system.
    Exact,
    /// The smallest-`h` run of the same `K`.
    Finest,
}

/// One solved sweep point.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub truncation: usize,
    pub h: f64,
    pub state: CoefficientSet,
    pub energy: f64,
    pub converged: bool,
}

/// Ground state of `config` at one `(K, h)`. For `contact_hooke` this is
/// the SCF ground state from the Wigner inner solver and `energy` is the
/// total energy.
pub fn solve_point(config: &RunConfig) -> Result<SweepPoint> {
    let (state, energy, converged) = if config.system == System::ContactHooke {
        let (dft, f) = run_scf(config, InnerSolver::Wigner)?;
        (
            f.expect("Wigner inner solver keeps its state"),
            dft.energy,
            dft.converged,
        )
    } else {
        let run = run_itp(&config.solver, potential(config)?.as_ref())?;
        let f = run.states.into_iter().next().expect("at least one state");
        (f, run.energies[0], run.converged)
    };
    Ok(SweepPoint {
        truncation: config.solver.truncation,
        h: config.solver.h,
        state,
        energy,
        converged,
    })
}

/// Closed-form ground-state coefficients and density `f_0` on the mesh.
pub fn exact_reference(config: &RunConfig, mesh: Arc<Mesh1D>, truncation: usize) -> Result<CoefficientSet> {
    match config.system {
        System::Harmonic if config.omega == 1.0 => Ok(harmonic_coefficients(mesh, 0, truncation)),
        System::Harmonic => Err(CliError::Usage(
            "the exact harmonic reference is available for omega = 1 only".into(),
        )),
        System::Hydrogen1d => Ok(hydrogen_coefficients(mesh, truncation)),
        System::HookeKs => Ok(hooke_coefficients(mesh, truncation)?),
        System::ContactHooke => Err(CliError::Usage(
            "contact_hooke has no closed form; use --reference finest".into(),
        )),
    }
}

/// `max_k max_i |f_2k(x_i) − g_2k(x_i)|` over the nodes of `f`, with `g`
/// interpolated onto them, and the same for `f_0` alone.
pub fn coefficient_errors(f: &CoefficientSet, g: &CoefficientSet) -> Result<(f64, f64)> {
    let nodes = f.mesh().nodes();
    let mut per_k = Vec::with_capacity(f.truncation() + 1);
    for k in 0..=f.truncation().min(g.truncation()) {
        let mut worst: f64 = 0.0;
        for (x, v) in nodes.iter().zip(f.coeff(k)) {
            let r = g.mesh().interpolate(g.coeff(k), *x)?;
            worst = worst.max((v - r).abs());
        }
        per_k.push(worst);
    }
    Ok((per_k.iter().copied().fold(0.0, f64::max), per_k[0]))
}

/// Runs every `(K, h)` point on up to `threads` workers. Each worker writes
/// its state to `points/` under the output directory; the results come back
/// in input order.
pub fn run_sweep(config: &RunConfig, points: &[(usize, f64)], threads: usize) -> Result<Vec<SweepPoint>> {
    let point_dir = config.output_dir.join("points");
    ensure_dir(&point_dir)?;
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<SweepPoint>>>> = Mutex::new((0..points.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads.clamp(1, points.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&(truncation, h)) = points.get(i) else { break };
                let mut c = config.clone();
                c.solver.truncation = truncation;
                c.solver.h = h;
                let out = solve_point(&c).and_then(|p| {
                    let path = point_dir.join(format!("state_K{truncation}_h{h}.csv"));
                    write_states(&path, std::slice::from_ref(&p.state))?;
                    Ok(p)
                });
                results.lock().expect("worker panicked")[i] = Some(out);
            });
        }
    });
    results
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|r| r.expect("every point is visited"))
        .collect()
}

/// Error table over `h_list × k_list`. In `finest` mode the smallest `h`
/// of each `K` is the reference and is not itself reported.
pub fn converge(
    config: &RunConfig,
    h_list: &[f64],
    k_list: &[usize],
    reference: ReferenceKind,
    threads: usize,
) -> Result<ConvergenceReport> {
    let mut hs = h_list.to_vec();
    if hs.is_empty() || k_list.is_empty() {
        return Err(CliError::Usage("--h-list and --k-list must not be empty".into()));
    }
    if hs.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
        return Err(CliError::Usage("every h must be positive".into()));
    }
    hs.sort_by(|a, b| b.total_cmp(a));
    if hs.windows(2).any(|w| w[0] == w[1]) {
        return Err(CliError::Usage("--h-list contains duplicates".into()));
    }
    if reference == ReferenceKind::Exact {
        let mesh = config.solver.mesh()?;
        exact_reference(config, mesh, 0)?;
    }
    for &h in &hs {
        let mut c = config.clone();
        c.solver.h = h;
        c.validate()?;
    }
    let points: Vec<(usize, f64)> = k_list.iter().flat_map(|&k| hs.iter().map(move |&h| (k, h))).collect();
    let solved = run_sweep(config, &points, threads)?;

    let mut rows = Vec::new();
    for &k in k_list {
        let runs: Vec<&SweepPoint> = solved.iter().filter(|p| p.truncation == k).collect();
        let (reported, finest) = match reference {
            ReferenceKind::Exact => (&runs[..], None),
            ReferenceKind::Finest => (&runs[..runs.len() - 1], Some(runs[runs.len() - 1])),
        };
        for p in reported {
            let target = match finest {
                Some(f) => f.state.clone(),
                None => exact_reference(config, p.state.mesh().clone(), k)?,
            };
            let (error, density_error) = coefficient_errors(&p.state, &target)?;
            rows.push(ConvergenceRow {
                truncation: k,
                h: p.h,
                error,
                density_error,
                energy: p.energy,
                order: None,
                converged: p.converged,
            });
        }
    }
    Ok(ConvergenceReport::new(rows, hs.len()))
}

pub fn cmd_converge(config: &RunConfig, h_list: &[f64], k_list: &[usize], reference: ReferenceKind) -> Result<Outcome> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let report = converge(config, h_list, k_list, reference, threads)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let dir = &config.output_dir;
    let path = dir.join("convergence.csv");
    report.write(&path)?;
    let converged = report.rows.iter().all(|r| r.converged);
    let manifest = write_manifest(dir, config, "converge", converged)?;
    Ok(Outcome {
        converged,
        files: vec![path, manifest],
    })
}

/// `n` equally spaced points from `lo` to `hi`, mirror-exact: for
/// `lo = −hi` the list is symmetric about zero bit for bit.
pub fn grid_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let m = (n - 1) as f64;
    (0..n)
        .map(|i| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => (lo * (n - 1 - i) as f64 + hi * i as f64) / m,
        })
        .collect()
}

pub struct GridRequest {
    pub x_range: (f64, f64),
    pub p_range: (f64, f64),
    pub resolution: i64,
    /// Read the state from a `state.csv` instead of solving.
    pub state_file: Option<PathBuf>,
    pub state_index: usize,
}

/// `f(x, p)` on a `resolution × resolution` grid; writes `wigner_grid.csv`
/// (`x,p,f`) and the gnuplot script `wigner_grid.gp`.
pub fn cmd_wigner_grid(config: &RunConfig, request: &GridRequest) -> Result<Outcome> {
    let resolution = usize::try_from(request.resolution)
        .ok()
        .filter(|r| *r > 0)
        .ok_or_else(|| CliError::Usage(format!("resolution must be positive, got {}", request.resolution)))?;
    for (name, (lo, hi)) in [("x", request.x_range), ("p", request.p_range)] {
        if !(lo < hi) {
            return Err(CliError::Usage(format!("{name} range [{lo}, {hi}] is empty")));
        }
    }
    let a = config.solver.half_width;
    let (x_lo, x_hi) = request.x_range;
    if x_lo < -a || x_hi > a {
        return Err(CliError::Usage(format!(
            "x range [{x_lo}, {x_hi}] leaves the domain [-{a}, {a}]"
        )));
    }
    let (f, converged) = match &request.state_file {
        Some(path) => (read_state(path, config.solver.mesh()?, request.state_index)?, true),
        None => {
            require_not_scf(config, "wigner-grid")?;
            if request.state_index >= config.solver.n_states {
                return Err(CliError::Usage(format!(
                    "state {} requested but n_states = {}",
                    request.state_index, config.solver.n_states
                )));
            }
            let run = run_itp(&config.solver, potential(config)?.as_ref())?;
            (run.states[request.state_index].clone(), run.converged)
        }
    };
    let xs = grid_points(x_lo, x_hi, resolution);
    let ps = grid_points(request.p_range.0, request.p_range.1, resolution);
    let mut rows = Vec::with_capacity(xs.len() * ps.len());
    for &x in &xs {
        for &p in &ps {
            rows.push(vec![float(x), float(p), float(evaluate_wigner(&f, x, p)?)]);
        }
    }
    let dir = &config.output_dir;
    ensure_dir(dir)?;
    let grid = dir.join("wigner_grid.csv");
    write_csv(&grid, &["x", "p", "f"].map(String::from), rows)?;
    let script = dir.join("wigner_grid.gp");
    write_text(&script, &gnuplot_script("wigner_grid.csv"))?;
    let manifest = write_manifest(dir, config, "wigner-grid", converged)?;
    Ok(Outcome {
        converged,
        files: vec![grid, script, manifest],
    })
}

fn gnuplot_script(data: &str) -> String {
    format!(
        "# Wigner function on a phase-space grid; run with `gnuplot -p wigner_grid.gp`\n\
         set datafile separator ','\n\
         set xlabel 'x'\n\
         set ylabel 'p'\n\
         set cblabel 'f(x,p)'\n\
         set palette defined (-1 'blue', 0 'white', 1 'red')\n\
         set size ratio -1\n\
         plot '{data}' using 1:2:3 skip 1 with image notitle\n"
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points_are_mirror_exact() {
        for n in [1usize, 2, 7, 40, 101] {
            let g = grid_points(-3.3, 3.3, n);
            assert_eq!(g.len(), n);
            assert_eq!(g[0], -3.3);
            if n == 1 {
                continue;
            }
            assert_eq!(g[n - 1], 3.3);
            for i in 0..n {
                assert_eq!(g[i], -g[n - 1 - i]);
            }
        }
    }

    #[test]
    fn state_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mesh = Arc::new(Mesh1D::uniform(4.0, 0.5, wigner_core::fem1d::ElementOrder::Linear).unwrap());
        let f = harmonic_coefficients(mesh.clone(), 0, 3);
        let g = harmonic_coefficients(mesh.clone(), 1, 3);
        let path = dir.path().join("state.csv");
        write_states(&path, &[f.clone(), g.clone()]).unwrap();
        assert_eq!(read_state(&path, mesh.clone(), 0).unwrap().coeffs(), f.coeffs());
        assert_eq!(read_state(&path, mesh.clone(), 1).unwrap().coeffs(), g.coeffs());
        assert!(read_state(&path, mesh, 2).is_err());
        let other = Arc::new(Mesh1D::uniform(4.0, 0.25, wigner_core::fem1d::ElementOrder::Linear).unwrap());
        assert!(read_state(&path, other, 0).is_err());
    }

    #[test]
    fn coefficient_errors_against_a_finer_mesh() {
        let coarse = Arc::new(Mesh1D::uniform(4.0, 0.5, wigner_core::fem1d::ElementOrder::Linear).unwrap());
        let fine = Arc::new(Mesh1D::uniform(4.0, 0.25, wigner_core::fem1d::ElementOrder::Linear).unwrap());
        let f = CoefficientSet::from_fn(coarse, 1, |k, x| (k as f64 + 1.0) * x);
        let g = CoefficientSet::from_fn(fine, 1, |k, x| (k as f64 + 1.0) * x + if k == 1 { 0.25 } else { 0.0 });
        let (all, density) = coefficient_errors(&f, &g).unwrap();
        assert!((all - 0.25).abs() < 1e-15);
        assert!(density < 1e-15);
    }
}
