use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cutproject::config::JobConfig;
use cutproject::density::{
    average_direct, convolution_cascade, eigenfunction, fhat, invariant_density,
    refinement_fourier, refinement_integral, spectrum, DensityProfile, FourierProductValue,
};
use cutproject::diffraction::{bragg_intensities, WeightsMode};
use cutproject::error::Error;
use cutproject::hutchinson::{chaos_game, hutchinson_fixed_point, BinnedMeasure};
use cutproject::inflation::{omega_q, translations, verify_self_similarity, Inflation};
use cutproject::io;
use cutproject::modelset::{generate, patch_neighborhood};
use cutproject::ring::{fourier_module_points, EmbeddingLattice, RingElement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Parser)]
#[command(name = "cutproject", version, about = "Cut-and-project sets over real quadratic rings")]
struct Cli {
    /// Path to a key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Output formats; repeatable. Defaults to csv.
    #[arg(long, global = true, value_enum)]
    format: Vec<Format>,

    /// RNG seed for stochastic cross-checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Override a single config key, e.g. --set radius=500. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the model set sample, translation set, and summary statistics.
    Generate,
    /// Compute the invariant density by three independent routes.
    Density,
    /// Derivative eigenfunctions and the refinement-operator spectrum.
    Eigen,
    /// Bragg amplitudes and intensities over a module slice.
    Diffract,
    /// Hutchinson fixed-point measure and weak-convergence table.
    Hutchinson,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}

fn load_config(cli: &Cli) -> cutproject::Result<JobConfig> {
    let mut cfg = match &cli.config {
        Some(path) => JobConfig::from_file(path)?,
        None => JobConfig::default(),
    };
    for pair in &cli.overrides {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {pair:?}")))?;
        cfg.set(key.trim(), value.trim())?;
    }
    Ok(cfg)
}

struct Outputs<'a> {
    dir: &'a Path,
    formats: Vec<Format>,
}

impl Outputs<'_> {
    fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    fn write(&self, name: &str, contents: &str) -> cutproject::Result<()> {
        let path = self.dir.join(name);
        io::write_atomic(&path, contents.as_bytes())?;
        println!("wrote {}", path.display());
        Ok(())
    }

    fn csv(&self, stem: &str, contents: &str) -> cutproject::Result<()> {
        if self.wants(Format::Csv) {
            self.write(&format!("{stem}.csv"), contents)?;
        }
        Ok(())
    }

    fn json<T: serde::Serialize>(&self, stem: &str, value: &T) -> cutproject::Result<()> {
        if self.wants(Format::Json) {
            let mut text = serde_json::to_string_pretty(value)?;
            text.push('\n');
            self.write(&format!("{stem}.json"), &text)?;
        }
        Ok(())
    }

    fn svg(&self, stem: &str, contents: &str) -> cutproject::Result<()> {
        if self.wants(Format::Svg) {
            self.write(&format!("{stem}.svg"), contents)?;
        }
        Ok(())
    }
}

fn run(cli: &Cli) -> cutproject::Result<()> {
    let cfg = load_config(cli)?;
    let mut formats = cli.format.clone();
    if formats.is_empty() {
        formats.push(Format::Csv);
    }
    let out = Outputs {
        dir: &cli.out,
        formats,
    };
    match cli.command {
        Command::Generate => cmd_generate(&cfg, &out),
        Command::Density => cmd_density(&cfg, &out),
        Command::Eigen => cmd_eigen(&cfg, &out),
        Command::Diffract => cmd_diffract(&cfg, &out),
        Command::Hutchinson => cmd_hutchinson(&cfg, &out, cli.seed),
    }
}

fn cmd_generate(cfg: &JobConfig, out: &Outputs) -> cutproject::Result<()> {
    let (ring, window, inflation) = cfg.build()?;
    let sample = generate(&ring, &window, cfg.radius)?;
    let t = translations(&ring, &window, &inflation, cfg.radius)?;

    out.csv("sample", &io::sample_to_csv(&sample))?;
    out.csv("translations", &io::translations_to_csv(&t))?;
    out.json("sample", &sample)?;
    out.json("translations", &t)?;

    // verify the inflation on the first few translations
    let mut reports = Vec::new();
    for v in t.sample.points.iter().take(8) {
        reports.push(verify_self_similarity(&sample, &inflation, *v)?);
    }
    let all_pass = reports.iter().all(|r| r.passed());

    let patch = if cfg.patch_radius + cfg.patch_radius <= cfg.radius {
        Some(patch_neighborhood(&sample, cfg.patch_radius, cfg.patch_radius)?)
    } else {
        None
    };

    let summary = serde_json::json!({
        "points": sample.points.len(),
        "density": sample.density(),
        "min_gap": sample.min_gap()?,
        "relative_denseness": sample.relative_denseness()?,
        "discrepancy": sample.uniform_distribution_discrepancy(cfg.bins.min(64))?,
        "translations": t.len(),
        "omega_q": [t.omega_q.lo, t.omega_q.hi],
        "self_similarity_verified": all_pass,
        "patch_translations": patch.map(|p| p.translations.len()),
    });
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    out.write("summary.json", &text)?;
    println!(
        "generated {} points, {} translations, density {:.6}",
        sample.points.len(),
        t.len(),
        sample.density()
    );
    Ok(())
}

/// Inflation^n, with overflow-checked coefficient arithmetic.
fn inflation_power(inflation: &Inflation, n: u32) -> cutproject::Result<Inflation> {
    let ring = inflation.ring;
    let mut q = RingElement::ONE;
    for _ in 0..n {
        q = ring.mul(q, inflation.q_factor)?;
    }
    Inflation::new(&ring, q)
}

fn cmd_density(cfg: &JobConfig, out: &Outputs) -> cutproject::Result<()> {
    let (ring, window, inflation) = cfg.build()?;

    // one panel per requested power of the inflation factor
    let mut panels = Vec::new();
    for &n in &cfg.powers {
        let inf_n = inflation_power(&inflation, n)?;
        let oq = omega_q(&window, inf_n.a_contraction)?;
        let f = invariant_density(&window, &oq, inf_n.a_contraction, cfg.grid)?;
        out.csv(&format!("density_pow{n}"), &io::profile_to_csv(&f))?;
        out.json(&format!("density_pow{n}"), &f)?;
        panels.push((format!("power {n}"), f));
    }
    let panel_refs: Vec<(String, &DensityProfile)> =
        panels.iter().map(|(t, f)| (t.clone(), f)).collect();
    out.svg("densities", &io::svg_profiles(&panel_refs))?;

    // route comparison for the base inflation
    let oq = omega_q(&window, inflation.a_contraction)?;
    let a = inflation.a_contraction;
    let f = &panels
        .iter()
        .find(|(t, _)| t == "power 1")
        .map(|(_, f)| f.clone())
        .unwrap_or(invariant_density(&window, &oq, a, cfg.grid)?);
    let cascade = convolution_cascade(&window, &oq, a, cfg.grid, 24)?;
    let t = translations(&ring, &window, &inflation, cfg.radius)?;
    let routes = serde_json::json!({
        "fourier_vs_cascade_sup": f.sup_distance(&cascade),
        "fixed_point_residuals": {
            "average_direct": f.sup_distance(&average_direct(f, &t)),
            "refinement_integral": f.sup_distance(&refinement_integral(f, &oq, a)?),
            "refinement_fourier": f.sup_distance(&refinement_fourier(f, &oq, a)?),
        },
        "integral": f.integral(),
        "min_value": f.min_value(),
    });
    let mut text = serde_json::to_string_pretty(&routes)?;
    text.push('\n');
    out.write("routes.json", &text)?;

    // transform samples along a k-grid
    let values: Vec<FourierProductValue> = (0..=200)
        .map(|j| fhat(j as f64 * 0.05, &oq, a, cfg.tol))
        .collect();
    out.csv("density_ft", &io::fourier_values_to_csv(&values))?;
    println!(
        "density done: integral {:.9}, fourier/cascade sup distance {:.3e}",
        f.integral(),
        f.sup_distance(&cascade)
    );
    Ok(())
}

fn cmd_eigen(cfg: &JobConfig, out: &Outputs) -> cutproject::Result<()> {
    let (ring, window, inflation) = cfg.build()?;
    let a = inflation.a_contraction;
    let oq = omega_q(&window, a)?;
    let f = invariant_density(&window, &oq, a, cfg.grid)?;
    let t = translations(&ring, &window, &inflation, cfg.radius)?;

    // spectrum of the refinement operator: powers of the contraction
    let entries = spectrum(&[Complex64::new(a, 0.0)], cfg.degree as usize)?;

    // empirical residual of A u = a^n u for the pure derivative orders
    let mut residuals = Vec::with_capacity(entries.len());
    let mut panels: Vec<(String, DensityProfile)> = vec![("density".into(), f.clone())];
    for e in &entries {
        let n = e.multi_index.iter().sum::<usize>();
        if n == 0 || n > 4 {
            residuals.push(f64::NAN);
            continue;
        }
        let u = eigenfunction(&f, n);
        let au = average_direct(&u, &t);
        let mut resid = 0.0_f64;
        for j in 0..u.values.len() {
            resid = resid.max((au.values[j] - a.powi(n as i32) * u.values[j]).abs());
        }
        residuals.push(resid / u.sup_norm());
        if n as u32 <= cfg.order.max(1) {
            panels.push((format!("derivative {n}"), u));
        }
    }
    out.csv("spectrum", &io::spectrum_to_csv(&entries, Some(&residuals)))?;
    out.json("spectrum", &entries)?;

    let u = eigenfunction(&f, cfg.order as usize);
    out.csv("eigenfunction", &io::profile_to_csv(&u))?;
    out.json("eigenfunction", &u)?;
    let panel_refs: Vec<(String, &DensityProfile)> =
        panels.iter().map(|(t, p)| (t.clone(), p)).collect();
    out.svg("eigenfunctions", &io::svg_profiles(&panel_refs))?;
    println!(
        "eigen done: {} spectrum points, order-{} derivative with {} nodes",
        entries.len(),
        cfg.order,
        u.sign_changes(1e-4)
    );
    Ok(())
}

fn cmd_diffract(cfg: &JobConfig, out: &Outputs) -> cutproject::Result<()> {
    let (ring, window, inflation) = cfg.build()?;
    let a = inflation.a_contraction;
    let oq = omega_q(&window, a)?;
    let lattice = EmbeddingLattice::new(ring);
    let points = fourier_module_points(&lattice, cfg.k_max, cfg.k_star_max)?;
    if points.is_empty() {
        return Err(Error::InvalidParameter(
            "no module points in the requested k ranges".into(),
        ));
    }
    let flat = bragg_intensities(&points, &oq, a, WeightsMode::Flat)?;
    let weighted = bragg_intensities(&points, &oq, a, WeightsMode::Invariant)?;
    out.csv("bragg_flat", &io::bragg_to_csv(&flat))?;
    out.csv("bragg_invariant", &io::bragg_to_csv(&weighted))?;
    out.json("bragg_flat", &flat)?;
    out.json("bragg_invariant", &weighted)?;
    out.svg("bragg_flat", &io::svg_stems(&flat, "Bragg intensities, flat weights"))?;
    out.svg(
        "bragg_invariant",
        &io::svg_stems(&weighted, "Bragg intensities, invariant-density weights"),
    )?;
    println!(
        "diffract done: {} module points, strongest weighted intensity {:.6}",
        points.len(),
        weighted.iter().fold(0.0_f64, |m, p| m.max(p.intensity))
    );
    Ok(())
}

fn cmd_hutchinson(cfg: &JobConfig, out: &Outputs, seed: u64) -> cutproject::Result<()> {
    let (ring, window, inflation) = cfg.build()?;
    let a = inflation.a_contraction;
    let oq = omega_q(&window, a)?;
    let t = translations(&ring, &window, &inflation, cfg.radius)?;
    if t.is_empty() {
        return Err(Error::EmptyWindow {
            lo: t.omega_q.lo,
            hi: t.omega_q.hi,
        });
    }
    let init = BinnedMeasure::uniform(window, cfg.bins);
    let (mu, iters, last) = hutchinson_fixed_point(&t, init, cfg.fp_tol, cfg.max_iter)?;
    out.csv("measure", &io::measure_to_csv(&mu))?;
    out.json("measure", &mu)?;
    out.svg("measure", &io::svg_histogram(&mu, "Hutchinson fixed-point measure"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chaos = chaos_game(&t, window, cfg.bins, cfg.chaos_points, 64, &mut rng);
    out.csv("chaos", &io::measure_to_csv(&chaos))?;

    // weak convergence along the radius ladder against the invariant density
    let f = invariant_density(&window, &oq, a, cfg.grid)?;
    let phis = [
        DensityProfile::from_fn(window, cfg.grid, |_| 1.0),
        DensityProfile::from_fn(window, cfg.grid, |x| x),
        DensityProfile::from_fn(window, cfg.grid, |x| x * x),
    ];
    let sets: Vec<_> = cfg
        .s_ladder
        .iter()
        .map(|&s| translations(&ring, &window, &inflation, s))
        .collect::<cutproject::Result<_>>()?;
    let rows = cutproject::hutchinson::weak_convergence_report(
        &sets,
        &phis,
        &f,
        cfg.bins,
        cfg.fp_tol,
        cfg.max_iter,
    )?;
    out.csv("convergence", &io::convergence_to_csv(&rows, &["one", "x", "x2"]))?;
    out.json("convergence", &rows)?;
    println!(
        "hutchinson done: fixed point in {iters} iterations (last step {last:.3e}), chaos-game L1 gap {:.3e}",
        mu.l1_distance(&chaos)
    );
    Ok(())
}
