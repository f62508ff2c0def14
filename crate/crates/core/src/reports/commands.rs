use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

use rayon::prelude::*;

use super::{gamma_grid, Cell, Command, SweepConfig, Table};
use crate::bell::{
    asymptotic_bound, block_average_from, critical_efficiency_chsh, critical_efficiency_mermin,
    BipartiteModel, BlockGain, Critical, Inequality, NoiseModels, TripartiteModel, DEFAULT_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::observables::{rotate_state, stokes_vector, ObservableKind};
use crate::states::{bghz_coefficients, bsv_weights, fock_product_state, BellKind};

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Runs `command`, on a dedicated pool of `config.jobs` threads when given.
pub fn run(command: Command, config: &SweepConfig) -> Result<Table> {
    check_fields(command, config)?;
    match config.jobs {
        Some(0) => Err(Error::Config("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(|| dispatch(command, config)),
        None => dispatch(command, config),
    }
}

fn dispatch(command: Command, config: &SweepConfig) -> Result<Table> {
    let mut table = match command {
        Command::ChshCurve => chsh_curve(config),
        Command::NonvacuumCurve => nonvacuum_curve(config),
        Command::PerSector => per_sector(config),
        Command::BlockAverage => block_average(config),
        Command::CriticalEfficiency => critical_efficiency(config),
        Command::CriticalNoise => critical_noise(config),
        Command::ChCurve => ch_curve(config),
        Command::MerminCurve => mermin_curve(config),
        Command::NormDemo => norm_demo(config),
    }?;
    table.meta.insert(0, ("command".into(), command.to_string()));
    table.meta.insert(0, ("tool".into(), format!("stokes-bell {VERSION}")));
    Ok(table)
}

fn check_fields(command: Command, c: &SweepConfig) -> Result<()> {
    use Command::*;
    let set = [
        ("gamma-min", c.gamma_min.is_some()),
        ("gamma-max", c.gamma_max.is_some()),
        ("gamma-step", c.gamma_step.is_some()),
        ("cutoff", c.cutoff.is_some()),
        ("cutoff-b", c.cutoff_b.is_some()),
        ("eta", c.eta.is_some()),
        ("q", c.q.is_some()),
        ("kind", c.kind.is_some()),
        ("inequality", c.inequality.is_some()),
        ("settings", c.settings.is_some()),
        ("noise-gamma", c.noise_gamma.is_some()),
        ("tolerance", c.tolerance.is_some()),
        ("blocks", c.blocks.is_some()),
    ];
    const SWEEP: [&str; 3] = ["gamma-min", "gamma-max", "gamma-step"];
    let extra: &[&str] = match command {
        ChshCurve => &["cutoff", "eta", "q", "kind", "settings", "noise-gamma"],
        NonvacuumCurve => &["cutoff", "cutoff-b", "eta", "kind", "settings"],
        PerSector => &["cutoff", "settings"],
        BlockAverage => &["blocks", "settings"],
        CriticalEfficiency => &["cutoff", "kind", "inequality", "settings", "tolerance"],
        CriticalNoise => &["cutoff", "kind", "settings", "noise-gamma"],
        ChCurve => &["cutoff", "eta", "kind", "settings"],
        MerminCurve => &["cutoff", "eta", "kind"],
        NormDemo => &["kind"],
    };
    let sweeps = !matches!(command, PerSector | BlockAverage | NormDemo);
    for (name, present) in set {
        let allowed = extra.contains(&name) || (sweeps && SWEEP.contains(&name));
        if present && !allowed {
            return Err(Error::Config(format!("{name} does not apply to {command}")));
        }
    }
    Ok(())
}

fn grid(c: &SweepConfig, defaults: (f64, f64, f64)) -> Result<Vec<f64>> {
    gamma_grid(
        c.gamma_min.unwrap_or(defaults.0),
        c.gamma_max.unwrap_or(defaults.1),
        c.gamma_step.unwrap_or(defaults.2),
    )
}

fn cutoff(c: &SweepConfig, default: usize) -> Result<usize> {
    match c.cutoff.unwrap_or(default) {
        0 => Err(Error::Config("cutoff must be at least 1".into())),
        n => Ok(n),
    }
}

fn eta(c: &SweepConfig) -> Result<f64> {
    let eta = c.eta.unwrap_or(1.0);
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Config(format!("eta must lie in [0, 1], got {eta}")));
    }
    Ok(eta)
}

/// Sign and normalized columns (vacuum-subtracted), or the one selected by `--kind`.
fn sign_kinds(c: &SweepConfig) -> Result<Vec<(&'static str, ObservableKind)>> {
    use ObservableKind::*;
    let both = vec![("sign", SignMinus), ("normalized", NormalizedMinus)];
    match c.kind {
        None => Ok(both),
        Some(Sign | SignMinus) => Ok(vec![both[0]]),
        Some(Normalized | NormalizedMinus) => Ok(vec![both[1]]),
        Some(k) => Err(Error::Config(format!("kind {k} is not available here; use sign or normalized"))),
    }
}

fn ch_kinds(c: &SweepConfig) -> Result<Vec<(&'static str, ObservableKind)>> {
    use ObservableKind::*;
    match c.kind {
        None => Ok(vec![("projector", Projector), ("rate", Rate)]),
        Some(Projector) => Ok(vec![("projector", Projector)]),
        Some(Rate) => Ok(vec![("rate", Rate)]),
        Some(k) => Err(Error::Config(format!("kind {k} is not available here; use projector or rate"))),
    }
}

fn settings_echo(c: &SweepConfig) -> String {
    let q = c.quad();
    format!(
        "theta={} theta'={} phi={} phi'={}",
        q.theta.theta, q.theta_prime.theta, q.phi.theta, q.phi_prime.theta
    )
}

fn grid_echo(g: &[f64]) -> String {
    let step = if g.len() > 1 { g[1] - g[0] } else { 0.0 };
    format!("gamma={}..{} ({} points, step {step})", g[0], g[g.len() - 1], g.len())
}

/// `sum_n w_n(gamma) values[n]` and the `n = 0` share.
fn weighted(values: &[f64], gamma: f64) -> Result<(f64, f64)> {
    let w = bsv_weights(gamma, values.len() - 1)?.weights;
    Ok((values.iter().zip(&w).map(|(v, w)| v * w).sum(), values[0] * w[0]))
}

fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

fn tail_at(gamma: f64, cutoff: usize) -> Result<f64> {
    Ok(bsv_weights(gamma, cutoff)?.tail.max(0.0))
}

fn chsh_curve(c: &SweepConfig) -> Result<Table> {
    let gammas = grid(c, (0.0, 3.0, 0.05))?;
    let cutoff = cutoff(c, 150)?;
    let eta = eta(c)?;
    let q = c.q.unwrap_or(1.0);
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Config(format!("q must lie in [0, 1], got {q}")));
    }
    let kinds = sign_kinds(c)?;
    let quad = c.quad();

    let members: Vec<BellKind> = if q < 1.0 { BellKind::ALL.to_vec() } else { vec![BellKind::PsiMinus] };
    let models = members
        .iter()
        .map(|&k| BipartiteModel::bell_family(k, cutoff, quad))
        .collect::<Result<Vec<_>>>()?;
    // values[kind][member][n]
    let values = kinds
        .iter()
        .map(|&(_, kind)| models.iter().map(|m| m.chsh_values(&m.table(kind, eta)?)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;

    let mut columns = vec!["gamma".to_string()];
    columns.extend(kinds.iter().map(|(l, _)| format!("lhs_{l}")));
    columns.push("vacuum_term".into());
    let mut t = Table { columns, ..Default::default() };
    for &g in &gammas {
        let mut row: Vec<Cell> = vec![g.into()];
        let mut vacuum = 0.0;
        for per_member in &values {
            let (signal, vac) = weighted(&per_member[0], g)?;
            vacuum = vac;
            let lhs = if q < 1.0 {
                let ng = c.noise_gamma.unwrap_or(g);
                let noise = per_member.iter().map(|v| weighted(v, ng).map(|x| x.0)).sum::<Result<f64>>()?
                    / per_member.len() as f64;
                q * signal + (1.0 - q) * noise
            } else {
                signal
            };
            row.push(lhs.abs().into());
        }
        row.push(vacuum.into());
        t.push(row);
    }
    let noise_gamma = c.noise_gamma.map_or("signal gain".to_string(), |g| g.to_string());
    t.meta("config", format!("{} cutoff={cutoff} eta={eta} q={q} noise_gamma={noise_gamma} {}", grid_echo(&gammas), settings_echo(c)));
    t.meta("cutoff", cutoff);
    t.meta("tail_max", sci(tail_at(gammas[gammas.len() - 1], cutoff)?));
    Ok(t)
}

fn nonvacuum_curve(c: &SweepConfig) -> Result<Table> {
    let gammas = grid(c, (0.0, 3.0, 0.05))?;
    let cut_a = cutoff(c, 150)?;
    let cut_b = c.cutoff_b.unwrap_or(100);
    if cut_b == 0 {
        return Err(Error::Config("cutoff-b must be at least 1".into()));
    }
    let eta = eta(c)?;
    let kind = match c.kind {
        None => ObservableKind::SignMinus,
        Some(_) => sign_kinds(c)?[0].1,
    };
    let quad = c.quad();
    let big = BipartiteModel::bsv(cut_a.max(cut_b), quad)?;
    let all = big.chsh_values(&big.table(kind, eta)?)?;
    let (va, vb) = (&all[..=cut_a], &all[..=cut_b]);

    let mut t = Table::new(&[
        "gamma",
        &format!("lhs_nv_cutoff_{cut_a}"),
        &format!("lhs_nv_cutoff_{cut_b}"),
        "asymptotic_bound",
    ]);
    for &g in &gammas {
        let (sa, vac_a) = weighted(va, g)?;
        let (sb, vac_b) = weighted(vb, g)?;
        t.push(vec![g.into(), (sa - vac_a).into(), (sb - vac_b).into(), asymptotic_bound(g).into()]);
    }
    let gmax = gammas[gammas.len() - 1];
    t.meta("config", format!("{} kind={kind} eta={eta} {}", grid_echo(&gammas), settings_echo(c)));
    t.meta("cutoff", format!("{cut_a} {cut_b}"));
    t.meta("tail_max", format!("{} {}", sci(tail_at(gmax, cut_a)?), sci(tail_at(gmax, cut_b)?)));
    Ok(t)
}

fn per_sector(c: &SweepConfig) -> Result<Table> {
    let n_max = cutoff(c, 100)?;
    let model = BipartiteModel::bsv(n_max, c.quad())?;
    let sign = model.chsh_values(&model.table(ObservableKind::SignMinus, 1.0)?)?;
    let norm = model.chsh_values(&model.table(ObservableKind::NormalizedMinus, 1.0)?)?;
    let ch = model.ch_values(&model.table(ObservableKind::Projector, 1.0)?)?;
    let mut t = Table::new(&["n", "parity", "chsh_sign", "chsh_normalized", "ch_projector"]);
    for n in 1..=n_max {
        let parity = if n % 2 == 1 { "odd" } else { "even" };
        t.push(vec![n.into(), parity.into(), sign[n].into(), norm[n].into(), ch[n].into()]);
    }
    t.meta("config", format!("n=1..{n_max} {}", settings_echo(c)));
    t.meta("cutoff", n_max);
    t.meta("tail_max", sci(0.0));
    Ok(t)
}

fn block_average(c: &SweepConfig) -> Result<Table> {
    let blocks = c.blocks.unwrap_or(12);
    if blocks == 0 {
        return Err(Error::Config("blocks must be at least 1".into()));
    }
    let n_max = crate::bell::patterns::PATTERN_PERIOD * blocks;
    let model = BipartiteModel::bsv(n_max, c.quad())?;
    let values = model.chsh_values(&model.table(ObservableKind::SignMinus, 1.0)?)?;
    let gains = [BlockGain::Finite(1.0), BlockGain::Finite(2.0), BlockGain::Finite(3.0), BlockGain::Infinite];
    let mut t = Table::new(&["block", "gamma_1", "gamma_2", "gamma_3", "gamma_inf"]);
    for b in 1..=blocks {
        let mut row: Vec<Cell> = vec![b.into()];
        for &g in &gains {
            row.push(block_average_from(&values, b, g)?.into());
        }
        t.push(row);
    }
    t.meta("config", format!("blocks=1..{blocks} kind=sign-minus {}", settings_echo(c)));
    t.meta("cutoff", n_max);
    t.meta("tail_max", sci(0.0));
    Ok(t)
}

fn critical_cell(c: Critical) -> Cell {
    c.or(f64::NAN).into()
}

fn critical_efficiency(c: &SweepConfig) -> Result<Table> {
    let inequality = c.inequality.unwrap_or(Inequality::Chsh);
    let tol = c.tolerance.unwrap_or(DEFAULT_TOLERANCE);
    if !(tol > 0.0) {
        return Err(Error::Config(format!("tolerance must be positive, got {tol}")));
    }
    let kinds = sign_kinds(c)?;
    let mut columns = vec!["gamma".to_string()];
    columns.extend(kinds.iter().map(|(l, _)| format!("eta_c_{l}")));
    let mut t = Table { columns, ..Default::default() };

    let (gammas, cutoff, rows) = match inequality {
        Inequality::Chsh => {
            let gammas = grid(c, (0.05, 2.5, 0.05))?;
            let cutoff = cutoff(c, 150)?;
            let model = BipartiteModel::bsv(cutoff, c.quad())?;
            let rows = gammas
                .par_iter()
                .map(|&g| {
                    kinds
                        .iter()
                        .map(|&(_, k)| critical_efficiency_chsh(&model, g, k, tol))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            t.meta("tail_max", sci(tail_at(gammas[gammas.len() - 1], cutoff)?));
            (gammas, cutoff, rows)
        }
        Inequality::Mermin => {
            if c.settings.is_some() {
                return Err(Error::Config("mermin settings are fixed to the canonical bases".into()));
            }
            let gammas = grid(c, (0.02, 0.3, 0.02))?;
            let cutoff = cutoff(c, 40)?;
            let rows = gammas
                .par_iter()
                .map(|&g| {
                    let model = TripartiteModel::bghz(&bghz_coefficients(g, cutoff)?)?;
                    kinds
                        .iter()
                        .map(|&(_, k)| critical_efficiency_mermin(&model, k, tol))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            let leak = bghz_coefficients(gammas[gammas.len() - 1], cutoff)?.leakage;
            t.meta("leakage_max", sci(leak));
            (gammas, cutoff, rows)
        }
        Inequality::Ch => return Err(Error::Config("critical efficiency supports chsh and mermin".into())),
    };
    for (g, crit) in gammas.iter().zip(rows) {
        let mut row: Vec<Cell> = vec![(*g).into()];
        row.extend(crit.into_iter().map(critical_cell));
        t.push(row);
    }
    let settings = if inequality == Inequality::Mermin { "bases=1,2".to_string() } else { settings_echo(c) };
    t.meta.insert(
        0,
        ("config".into(), format!("{} inequality={inequality} tolerance={tol} {settings}", grid_echo(&gammas))),
    );
    t.meta.insert(1, ("cutoff".into(), cutoff.to_string()));
    Ok(t)
}

fn critical_noise(c: &SweepConfig) -> Result<Table> {
    let gammas = grid(c, (0.05, 2.5, 0.05))?;
    let cutoff = cutoff(c, 150)?;
    let kinds = sign_kinds(c)?;
    let models = NoiseModels::new(cutoff, c.quad())?;
    let mut columns = vec!["gamma".to_string()];
    for (l, _) in &kinds {
        columns.extend([format!("q_c_{l}"), format!("signal_{l}"), format!("noise_{l}")]);
    }
    let mut t = Table { columns, ..Default::default() };
    let rows = gammas
        .par_iter()
        .map(|&g| {
            let ng = c.noise_gamma.unwrap_or(g);
            let mut row: Vec<Cell> = vec![g.into()];
            for &(_, k) in &kinds {
                let th = models.threshold(g, ng, k)?;
                row.extend([critical_cell(th.q_c), th.signal.into(), th.noise.into()]);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    rows.into_iter().for_each(|r| t.push(r));
    let noise_gamma = c.noise_gamma.map_or("signal gain".to_string(), |g| g.to_string());
    t.meta("config", format!("{} noise_gamma={noise_gamma} {}", grid_echo(&gammas), settings_echo(c)));
    t.meta("cutoff", cutoff);
    t.meta("tail_max", sci(tail_at(gammas[gammas.len() - 1], cutoff)?));
    Ok(t)
}

fn ch_curve(c: &SweepConfig) -> Result<Table> {
    let gammas = grid(c, (0.05, 2.0, 0.05))?;
    let cutoff = cutoff(c, 50)?;
    let eta = eta(c)?;
    let kinds = ch_kinds(c)?;
    let model = BipartiteModel::bsv(cutoff, c.quad())?;
    let values = kinds
        .iter()
        .map(|&(_, k)| model.ch_values(&model.table(k, eta)?))
        .collect::<Result<Vec<_>>>()?;
    let mut columns = vec!["gamma".to_string()];
    columns.extend(kinds.iter().map(|(l, _)| format!("ch_{l}")));
    let mut t = Table { columns, ..Default::default() };
    for &g in &gammas {
        let mut row: Vec<Cell> = vec![g.into()];
        for v in &values {
            row.push(weighted(v, g)?.0.into());
        }
        t.push(row);
    }
    t.meta("config", format!("{} eta={eta} window=[-1,0] {}", grid_echo(&gammas), settings_echo(c)));
    t.meta("cutoff", cutoff);
    t.meta("tail_max", sci(tail_at(gammas[gammas.len() - 1], cutoff)?));
    Ok(t)
}

fn mermin_curve(c: &SweepConfig) -> Result<Table> {
    let gammas = grid(c, (0.0, 0.3, 0.01))?;
    let cutoff = cutoff(c, 40)?;
    let eta = eta(c)?;
    let kinds = sign_kinds(c)?;
    let mut columns = vec!["gamma".to_string()];
    columns.extend(kinds.iter().map(|(l, _)| format!("lhs_{l}")));
    columns.extend(["vacuum_term".to_string(), "leakage".to_string()]);
    let mut t = Table { columns, ..Default::default() };
    let rows = gammas
        .par_iter()
        .map(|&g| {
            let coeffs = bghz_coefficients(g, cutoff)?;
            let model = TripartiteModel::bghz(&coeffs)?;
            let mut row: Vec<Cell> = vec![g.into()];
            let mut vacuum = 0.0;
            for &(_, k) in &kinds {
                let r = model.report(&model.table(k, eta)?)?;
                vacuum = r.vacuum_term;
                row.push(r.lhs.into());
            }
            row.extend([vacuum.into(), coeffs.leakage.into()]);
            Ok((row, coeffs.leakage))
        })
        .collect::<Result<Vec<_>>>()?;
    let leak = rows.iter().map(|(_, l)| *l).fold(0.0, f64::max);
    rows.into_iter().for_each(|(r, _)| t.push(r));
    t.meta("config", format!("{} eta={eta} bases=1,2", grid_echo(&gammas)));
    t.meta("cutoff", cutoff);
    t.meta("leakage_max", sci(leak));
    Ok(t)
}

fn norm_demo(c: &SweepConfig) -> Result<Table> {
    let kind = c.kind.unwrap_or(ObservableKind::Sign);
    let state = fock_product_state(3, 0);
    let mut t = Table::new(&["angle", "label", "s1", "s2", "s3", "norm"]);
    for (angle, label) in [(0.0, "0"), (FRAC_PI_8, "pi/8"), (FRAC_PI_4, "pi/4")] {
        let v = stokes_vector(&rotate_state(&state, angle)?, kind)?;
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        t.push(vec![angle.into(), label.into(), v[0].into(), v[1].into(), v[2].into(), norm.into()]);
    }
    t.meta("config", format!("state=|3,0> kind={kind}"));
    t.meta("cutoff", 3);
    t.meta("tail_max", sci(0.0));
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_inapplicable_flags() {
        let c = SweepConfig { q: Some(0.5), ..Default::default() };
        assert!(run(Command::PerSector, &c).is_err());
        let c = SweepConfig { kind: Some(ObservableKind::Rate), ..Default::default() };
        assert!(run(Command::ChshCurve, &c).is_err());
        let c = SweepConfig { jobs: Some(0), ..Default::default() };
        assert!(run(Command::NormDemo, &c).is_err());
    }

    #[test]
    fn norm_demo_rows() {
        let t = run(Command::NormDemo, &SweepConfig::default()).unwrap();
        let norms = t.floats("norm").unwrap();
        assert!((norms[0] - 1.0).abs() < 1e-12);
        assert!(norms[1] > 1.0);
        assert!((norms[2] - 1.0).abs() < 1e-12);
        assert_eq!(t.meta_value("command"), Some("norm-demo"));
    }

    #[test]
    fn small_chsh_curve() {
        let c = SweepConfig { gamma_max: Some(0.2), gamma_step: Some(0.1), cutoff: Some(10), ..Default::default() };
        let t = run(Command::ChshCurve, &c).unwrap();
        assert_eq!(t.columns, ["gamma", "lhs_sign", "lhs_normalized", "vacuum_term"]);
        assert_eq!(t.rows.len(), 3);
        assert_eq!(t.floats("lhs_sign").unwrap()[0], 2.0);
    }
}
