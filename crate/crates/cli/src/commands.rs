use std::fmt::Write as _;
use std::str::FromStr;

use morsebott::cascades::{correspondence_check, epsilon_sweep, CascadeSetup};
use morsebott::exact_algebra::{betti_numbers, homology, verify_complex, Coefficients, HomologyResult};
use morsebott::flow_engine::{detect_critical_set, CriticalSet, DetectOptions, Tolerances, Trajectory};
use morsebott::landscape::{catalog, constant_on, Landscape, LandscapeKind};
use morsebott::msw_complex::{build_msw, morse_poly_of, MorseComplex};
use morsebott::multicomplex::{
    assemble, build_morse_bott_multicomplex, interpolation_checks, verify_multicomplex, BuildMode, MulticomplexDoc,
};
use morsebott::perturbation::{mb_inequalities_pipeline, perturbed_complex, stability_sweep};
use morsebott::poly_lab::{poincare_poly, solve_R};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{is_input_error, CliError};
use crate::report::Report;

/// The bundled double-complex fixture used by `algebra-verify` when no
/// document is given.
pub const DOUBLE_COMPLEX_FIXTURE: &str = include_str!("../fixtures/double_complex.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Catalog,
    Analyze,
    Msw,
    Perturb,
    Cascade,
    Multicomplex,
    Crosscheck,
    AlgebraVerify,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Catalog,
        Command::Analyze,
        Command::Msw,
        Command::Perturb,
        Command::Cascade,
        Command::Multicomplex,
        Command::Crosscheck,
        Command::AlgebraVerify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Catalog => "catalog",
            Command::Analyze => "analyze",
            Command::Msw => "msw",
            Command::Perturb => "perturb",
            Command::Cascade => "cascade",
            Command::Multicomplex => "multicomplex",
            Command::Crosscheck => "crosscheck",
            Command::AlgebraVerify => "algebra-verify",
        }
    }

    fn needs_landscape(self) -> bool {
        !matches!(self, Command::Catalog | Command::AlgebraVerify)
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown command `{s}`")))
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub dump_trajectories: bool,
    /// Multicomplex document for `algebra-verify`.
    pub document: Option<String>,
}

/// A finished command: its report and, if requested, trajectory samples as
/// CSV.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Report,
    pub trajectories: Option<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.passed {
            0
        } else {
            1
        }
    }
}

/// Trajectory dump with columns `group,line,piece,t,f,x0,x1,x2`.
struct Csv(String);

impl Csv {
    fn new() -> Self {
        Self("group,line,piece,t,f,x0,x1,x2\n".into())
    }

    fn add(&mut self, group: &str, line: usize, piece: usize, tr: &Trajectory) {
        for s in &tr.samples {
            let x = s.x.raw();
            let _ = writeln!(self.0, "{group},{line},{piece},{},{},{},{},{}", s.t, s.f, x.x, x.y, x.z);
        }
    }

    fn complex(&mut self, prefix: &str, c: &MorseComplex) {
        for ((p, q), conn) in &c.connections {
            for (i, l) in conn.lines.iter().enumerate() {
                self.add(&format!("{prefix}{p}->{q}"), i, 0, &l.trajectory);
            }
        }
    }
}

struct Ctx {
    config: RunConfig,
    landscape: Landscape,
    tol: Tolerances,
    opts: DetectOptions,
    coefficients: Coefficients,
    csv: Option<Csv>,
}

impl Ctx {
    fn set(&self) -> morsebott::Result<CriticalSet> {
        detect_critical_set(&self.landscape, &self.tol, &self.opts)
    }

    fn reference(&self) -> Vec<usize> {
        self.landscape.manifold.reference_betti()
    }

    fn homology_check(&self, report: &mut Report, name: &str, h: &[HomologyResult]) {
        let betti = betti_numbers(h);
        let torsion_free = h.iter().all(|r| r.torsion.is_empty());
        report.check(
            name,
            betti == self.reference() && torsion_free,
            format!(
                "betti {betti:?}, reference {:?}, torsion free: {torsion_free}",
                self.reference()
            ),
        );
    }
}

/// Runs one command. Input problems (config, unknown landscape, unreadable
/// document) are errors; pipeline failures are recorded as failing checks
/// in the report.
pub fn run(command: Command, config: Option<&RunConfig>, options: &RunOptions) -> Result<Outcome, CliError> {
    let mut report = Report::new(command.name(), config.cloned());
    match command {
        Command::Catalog => {
            catalog_cmd(&mut report);
            return Ok(Outcome {
                report,
                trajectories: None,
            });
        }
        Command::AlgebraVerify => {
            let text = options.document.as_deref().unwrap_or(DOUBLE_COMPLEX_FIXTURE);
            algebra_verify(&mut report, text)?;
            return Ok(Outcome {
                report,
                trajectories: None,
            });
        }
        _ => {}
    }
    debug_assert!(command.needs_landscape());
    let config = config
        .ok_or_else(|| CliError::Config(format!("`{}` needs --config or --landscape", command.name())))?
        .clone();
    config.validate()?;
    let landscape = config.landscape()?;
    let mut ctx = Ctx {
        tol: config.tolerances,
        opts: config.detect_options(),
        coefficients: config.coefficients.coefficients(),
        csv: options.dump_trajectories.then(Csv::new),
        landscape,
        config,
    };
    let result = match command {
        Command::Analyze => analyze(&mut ctx, &mut report),
        Command::Msw => msw(&mut ctx, &mut report),
        Command::Perturb => perturb(&mut ctx, &mut report),
        Command::Cascade => cascade(&mut ctx, &mut report),
        Command::Multicomplex => multicomplex(&mut ctx, &mut report),
        Command::Crosscheck => crosscheck(&mut ctx, &mut report),
        Command::Catalog | Command::AlgebraVerify => unreachable!(),
    };
    match result {
        Err(e) if is_input_error(&e) => return Err(e.into()),
        Err(e) => report.check(command.name(), false, e.to_string()),
        Ok(()) => {}
    }
    Ok(Outcome {
        report,
        trajectories: ctx.csv.map(|c| c.0),
    })
}

#[derive(Serialize)]
struct CatalogEntry {
    #[serde(flatten)]
    landscape: Landscape,
    reference_betti: Vec<usize>,
}

fn catalog_cmd(report: &mut Report) {
    let entries: Vec<CatalogEntry> = catalog()
        .into_iter()
        .map(|l| CatalogEntry {
            reference_betti: l.manifold.reference_betti(),
            landscape: l,
        })
        .collect();
    report.section("entries", entries);
}

fn analyze(ctx: &mut Ctx, report: &mut Report) -> morsebott::Result<()> {
    let set = ctx.set()?;
    report.section("critical_set", &set);
    report.section("counts_by_index", set.counts_by_index());
    let chi = ctx.landscape.manifold.euler_characteristic();
    report.check(
        "euler_characteristic",
        set.euler_sum() == chi,
        format!("Σ(−1)^λ χ(C) = {}, χ(M) = {chi}", set.euler_sum()),
    );
    Ok(())
}

fn msw(ctx: &mut Ctx, report: &mut Report) -> morsebott::Result<()> {
    let set = ctx.set()?;
    let c = build_msw(&ctx.landscape, &set, ctx.coefficients, &ctx.tol)?;
    let h = c.homology()?;
    report.section("critical_set", &set);
    report.section("complex", &c);
    report.section("homology", &h);
    ctx.homology_check(report, "homology_matches_reference", &h);
    let m_t = morse_poly_of(&c);
    let p_t = poincare_poly(&h);
    report.section("morse_polynomial", &m_t);
    report.section("poincare_polynomial", &p_t);
    match solve_R(&m_t, &p_t) {
        Ok(r) => {
            report.check("morse_inequalities", true, format!("R = {r:?}"));
            report.section("r", r);
        }
        Err(e) => report.check("morse_inequalities", false, e.to_string()),
    }
    if let Some(csv) = ctx.csv.as_mut() {
        csv.complex("", &c);
    }
    Ok(())
}

fn perturb(ctx: &mut Ctx, report: &mut Report) -> morsebott::Result<()> {
    let set = ctx.set()?;
    let aux = ctx.config.auxiliaries(&set);
    let eps = ctx.config.epsilon_for(&ctx.landscape);
    let r = mb_inequalities_pipeline(&ctx.landscape, &aux, eps, &ctx.tol, &ctx.opts)?;
    report.check(
        "index_relation",
        r.index_relation.holds(),
        "λ_p^h = λ_j + λ_p^j for every critical point of h",
    );
    report.check(
        "chain_group_decomposition",
        r.decomposition.failing_degree.is_none(),
        format!("failing degree {:?}", r.decomposition.failing_degree),
    );
    report.check(
        "kernel_inequality",
        r.kernel_check_failure.is_none(),
        format!("failing degree {:?}", r.kernel_check_failure),
    );
    report.check(
        "morse_bott_inequalities",
        r.passed(),
        format!("MB = {:?}, P = {:?}, R = {:?}", r.mb_t, r.p_t, r.r_solved),
    );
    ctx.homology_check(report, "homology_matches_reference", &r.homology);
    if let Some(csv) = ctx.csv.as_mut() {
        csv.complex("h:", &r.h_complex);
    }
    report.section("pipeline", &r);

    let sweep = ctx.config.sweep_for(&ctx.landscape);
    let stability = stability_sweep(&ctx.landscape, &aux, &sweep, &ctx.tol, &ctx.opts)?;
    let mut rows = Vec::new();
    let mut tables = Vec::new();
    let mut all_reference = true;
    for &e in &sweep {
        let run = perturbed_complex(&ctx.landscape, &set, &aux, e, ctx.coefficients, &ctx.tol, &ctx.opts)?;
        let h = run.complex.homology()?;
        all_reference &= betti_numbers(&h) == ctx.reference();
        tables.push(run.hset.counts_by_index());
        rows.push(serde_json::json!({
            "epsilon": e,
            "counts_by_index": run.hset.counts_by_index(),
            "homology": h,
        }));
    }
    report.section("sweep", rows);
    report.section("stability", &stability);
    report.check(
        "sweep_stable",
        stability.iter().all(|r| r.stable) && tables.windows(2).all(|w| w[0] == w[1]),
        format!("critical tables {tables:?}"),
    );
    report.check("sweep_homology", all_reference, format!("ε ∈ {sweep:?}"));
    Ok(())
}

fn cascade(ctx: &mut Ctx, report: &mut Report) -> morsebott::Result<()> {
    let set = ctx.set()?;
    let aux = ctx.config.auxiliaries(&set);
    let setup = CascadeSetup::from_set(&ctx.landscape, set, &aux, &ctx.tol)?;
    let eps = ctx.config.epsilon_for(&ctx.landscape);
    let r = correspondence_check(&setup, eps, &ctx.opts)?;
    report.check(
        "correspondence",
        r.passed(),
        format!("{} adjacent pairs at ε = {eps}", r.pairs.len()),
    );
    report.check("boundary_relation", r.boundary_relation_holds, "∂^c = −∂^h entrywise");
    let h = homology(&r.cascade_complex, ctx.coefficients)?;
    ctx.homology_check(report, "homology_matches_reference", &h);
    if let Some(csv) = ctx.csv.as_mut() {
        for m in &r.moduli {
            for (i, c) in m.cascades.iter().enumerate() {
                for (k, tr) in c.trajectories.iter().enumerate() {
                    csv.add(&format!("{}->{}", m.from, m.to), i, k, tr);
                }
            }
        }
    }
    report.section("correspondence", &r);
    report.section("homology", &h);

    let sweep = ctx.config.sweep_for(&ctx.landscape);
    let mut sweeps = Vec::new();
    for (q, p) in setup.adjacent_pairs() {
        match epsilon_sweep(&setup, q, p, &sweep, &ctx.opts) {
            Ok(s) => {
                report.check(
                    &format!("epsilon_sweep:{q}->{p}"),
                    s.passed,
                    format!("final distance {:.3e}", s.final_distance),
                );
                sweeps.push(serde_json::to_value(&s).unwrap_or_default());
            }
            // A one-parameter family has no finite count to sweep.
            Err(morsebott::Error::BudgetExceeded(_)) => {}
            Err(e) => report.check(&format!("epsilon_sweep:{q}->{p}"), false, e.to_string()),
        }
    }
    report.section("epsilon_sweeps", sweeps);
    Ok(())
}

fn multicomplex(ctx: &mut Ctx, report: &mut Report) -> morsebott::Result<()> {
    let b = build_morse_bott_multicomplex(&ctx.landscape, BuildMode::Numeric, &ctx.tol, &ctx.opts)?;
    let h = b.homology(ctx.coefficients)?;
    report.check("relations", true, "Σ ∂_q ∂_{j−q} = 0 verified exactly");
    report.check(
        "filtration_preserved",
        b.assembled.filtration_preserved(),
        "∂ F_s ⊆ F_s",
    );
    ctx.homology_check(report, "homology_matches_reference", &h);
    report.section("chain_data", &b.data);
    report.section("multicomplex", b.document());
    report.section("assembled", &b.assembled.complex);
    report.section("layout", &b.assembled.layout);
    report.section("homology", &h);
    Ok(())
}

fn crosscheck(ctx: &mut Ctx, report: &mut Report) -> morsebott::Result<()> {
    let set = ctx.set()?;
    let aux = ctx.config.auxiliaries(&set);
    let eps = ctx.config.epsilon_for(&ctx.landscape);
    let run = perturbed_complex(&ctx.landscape, &set, &aux, eps, ctx.coefficients, &ctx.tol, &ctx.opts)?;
    let h_perturbation = run.complex.homology()?;
    let setup = CascadeSetup::from_set(&ctx.landscape, set, &aux, &ctx.tol)?;
    let corr = correspondence_check(&setup, eps, &ctx.opts)?;
    let h_cascade = homology(&corr.cascade_complex, ctx.coefficients)?;
    let b = build_morse_bott_multicomplex(&ctx.landscape, BuildMode::Numeric, &ctx.tol, &ctx.opts)?;
    let h_multicomplex = b.homology(ctx.coefficients)?;
    let constant = constant_on(ctx.landscape.manifold);
    let c = build_morse_bott_multicomplex(&constant, BuildMode::Numeric, &ctx.tol, &ctx.opts)?;
    let h_constant = c.homology(ctx.coefficients)?;

    let tables = [
        ("perturbation", &h_perturbation),
        ("cascade", &h_cascade),
        ("multicomplex", &h_multicomplex),
    ];
    for i in 0..tables.len() {
        for j in i + 1..tables.len() {
            let (a, ha) = tables[i];
            let (b, hb) = tables[j];
            report.check(
                &format!("agreement:{a}={b}"),
                ha == hb,
                format!("{:?} vs {:?}", betti_numbers(ha), betti_numbers(hb)),
            );
        }
    }
    report.check(
        "constant_model",
        h_perturbation == h_constant,
        format!("{} gives {:?}", constant.name, betti_numbers(&h_constant)),
    );
    ctx.homology_check(report, "reference_betti", &h_perturbation);
    report.check(
        "correspondence",
        corr.passed(),
        format!("{} adjacent pairs", corr.pairs.len()),
    );
    let interp = interpolation_checks(&ctx.tol, &ctx.opts);
    report.check(
        "interpolation",
        interp.passed(),
        "Morse and constant ends of the multicomplex",
    );
    report.section(
        "homology",
        serde_json::json!({
            "perturbation": h_perturbation,
            "cascade": h_cascade,
            "multicomplex": h_multicomplex,
            "constant_model": h_constant,
            "reference_betti": ctx.reference(),
        }),
    );
    report.section("interpolation", &interp);
    if ctx.landscape.kind == LandscapeKind::Morse {
        report.section("note", "Morse input: the perturbation is the function itself");
    }
    Ok(())
}

fn algebra_verify(report: &mut Report, text: &str) -> Result<(), CliError> {
    let doc = MulticomplexDoc::parse(text).map_err(CliError::from)?;
    let x = doc
        .to_multicomplex()
        .map_err(|e| CliError::Config(format!("multicomplex document: {e}")))?;
    report.section("document", &doc);
    match verify_multicomplex(&x) {
        Ok(()) => {
            report.check("multicomplex_relations", true, "Σ_{i+j=n} d_i d_j = 0 for every n");
            let a = assemble(&x).map_err(CliError::from)?;
            report.check(
                "assembly_is_complex",
                verify_complex(&a.complex).is_ok(),
                "∂∘∂ = 0 on the assembled complex",
            );
            report.check("filtration_preserved", a.filtration_preserved(), "∂ F_s ⊆ F_s");
            let h = homology(&a.complex, Coefficients::Integers).map_err(CliError::from)?;
            report.section("assembled", &a.complex);
            report.section("homology", &h);
        }
        Err(failures) => {
            report.check(
                "multicomplex_relations",
                false,
                format!("fails at {} (n, p, q) instances", failures.len()),
            );
            report.section("failures", &failures);
        }
    }
    Ok(())
}
