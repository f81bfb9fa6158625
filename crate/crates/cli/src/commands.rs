use std::io::Write;

use num_complex::Complex64;
use serde_json::json;

use latdisp_core::analysis::{
    dispersion_scan, finite_no_dispersion, fit_decay_exponent, log_spaced, DecaySeries, ScanPoint,
};
use latdisp_core::bessel::{bessel_integral_oracle, bessel_j, i_pow};
use latdisp_core::kernel::dispersion_envelope_constant;
use latdisp_core::oracle::{
    compare_kernel_vs_oracle, default_radius, kernel_via_fiber_quadrature, probe_offsets, CompareOptions,
    EvolverRegistry,
};
use latdisp_core::{ProductGraph, ProductPoint, Spectrum};

use crate::input::{load_graph, parse_offset};
use crate::{
    BesselArgs, Command, Failure, FitArgs, GraphArgs, KernelArgs, NoDispersionArgs, RunConfig, ScanArgs, VerifyArgs,
};

type CmdResult = Result<(), Failure>;

pub fn run(config: &RunConfig) -> CmdResult {
    match &config.command {
        Command::Bessel(args) => bessel(config, args),
        Command::Kernel(args) => kernel(config, args),
        Command::Verify(args) => verify(config, args),
        Command::Scan(args) => scan(config, args),
        Command::Fit(args) => fit(args),
        Command::NoDispersion(args) => no_dispersion(config, args),
    }
}

fn require_finite(name: &str, v: f64) -> CmdResult {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("--{name} must be finite, got {v}")))
    }
}

fn product_graph(args: &GraphArgs) -> Result<ProductGraph, Failure> {
    if args.d == 0 {
        return Err(Failure::Usage("--d must be at least 1".into()));
    }
    Ok(ProductGraph::new(load_graph(&args.graph)?, args.d)?)
}

fn complex_json(z: Complex64) -> serde_json::Value {
    json!([z.re, z.im])
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("reports serialize"));
}

fn status(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn bessel(config: &RunConfig, args: &BesselArgs) -> CmdResult {
    require_finite("t", args.t)?;
    if args.t < 0.0 {
        return Err(Failure::Usage(format!("--t must be nonnegative, got {}", args.t)));
    }
    let value = bessel_j(args.nu, args.t);
    let need = 2 * (args.nu.unsigned_abs() as usize + args.t.ceil() as usize) + 16;
    let nodes = args.nodes.unwrap_or(need + 32);
    let integral = bessel_integral_oracle(args.nu, args.t, nodes)?;
    let quadrature_error = (integral - i_pow(args.nu) * value).norm();
    let recurrence_residual = if args.t > 0.0 {
        let nu = args.nu;
        Some((bessel_j(nu - 1, args.t) + bessel_j(nu + 1, args.t) - 2.0 * nu as f64 / args.t * value).abs())
    } else {
        None
    };
    let pass = quadrature_error < 1e-11;
    if config.json {
        print_json(&json!({
            "nu": args.nu,
            "t": args.t,
            "value": value,
            "quadrature": complex_json(integral),
            "quadrature_nodes": nodes,
            "quadrature_error": quadrature_error,
            "recurrence_residual": recurrence_residual,
            "pass": pass,
        }));
    } else {
        println!("J_{}({}) = {}", args.nu, args.t, value);
        println!(
            "quadrature ({nodes} nodes): {} {}   |diff vs i^nu J| = {:e}  {}",
            integral.re,
            integral.im,
            quadrature_error,
            status(pass)
        );
        if let Some(r) = recurrence_residual {
            println!("three-term recurrence residual = {r:e}");
        }
    }
    if pass {
        Ok(())
    } else {
        Err(Failure::Check(format!("quadrature disagrees by {quadrature_error:e}")))
    }
}

fn kernel(config: &RunConfig, args: &KernelArgs) -> CmdResult {
    require_finite("t", args.t)?;
    let pg = product_graph(&args.graph)?;
    let nu = parse_offset(&args.offset, pg.d())?;
    if args.dump_spectrum {
        println!(
            "{}",
            serde_json::to_string_pretty(pg.spectrum()).expect("spectrum serializes")
        );
    }
    if args.block {
        let b = pg.kernel_block(&nu, args.t)?;
        let rows: Vec<Vec<serde_json::Value>> = (0..pg.k())
            .map(|p| (0..pg.k()).map(|q| complex_json(b.get(p, q))).collect())
            .collect();
        print_json(&json!({
            "nu": b.nu,
            "t": b.t,
            "lattice_factor": complex_json(b.lattice_factor),
            "block": rows,
        }));
        return Ok(());
    }
    let x = ProductPoint::new(nu.clone(), args.p);
    let y = ProductPoint::origin(pg.d(), args.q);
    let z = pg.kernel(&x, &y, args.t)?;
    if config.json {
        print_json(&json!({
            "nu": nu,
            "p": args.p,
            "q": args.q,
            "t": args.t,
            "re": z.re,
            "im": z.im,
        }));
    } else {
        println!("{} {}", z.re, z.im);
    }
    Ok(())
}

fn verify(config: &RunConfig, args: &VerifyArgs) -> CmdResult {
    require_finite("t", args.t)?;
    let pg = product_graph(&args.graph)?;
    let registry = EvolverRegistry::default();
    let options = CompareOptions {
        radius: args.radius,
        random_probes: args.probes,
        seed: config.seed,
        evolver: args.evolver.clone(),
        ..CompareOptions::default()
    };
    let oracle = compare_kernel_vs_oracle(&pg, args.t, &registry, &options)?;
    let oracle_pass = oracle.max_error < args.tolerance;

    let radius = args.radius.unwrap_or_else(|| default_radius(args.t));
    let axis = probe_offsets(pg.d(), args.t, radius, 0, config.seed);
    let mut quad_error: f64 = 0.0;
    let mut quad_entries = 0;
    for nu in &axis {
        let reach = nu.iter().map(|v| v.unsigned_abs() as usize).max().unwrap_or(0);
        let nodes = 2 * (reach + (2.0 * args.t.abs()).ceil() as usize) + 16;
        let block = pg.kernel_block(nu, args.t)?;
        for p in 0..pg.k() {
            for q in 0..pg.k() {
                let z = kernel_via_fiber_quadrature(&pg, nu, p, q, args.t, nodes)?;
                quad_error = quad_error.max((z - block.get(p, q)).norm());
                quad_entries += 1;
            }
        }
    }
    let quad_pass = quad_error < args.quadrature_tolerance;

    let nu_max = latdisp_core::kernel::truncation_radius(args.t);
    let mut mass_defect: f64 = 0.0;
    for source in 0..pg.k() {
        mass_defect = mass_defect.max((pg.row_mass(source, args.t, nu_max)? - 1.0).abs());
    }
    let mass_pass = mass_defect < 1e-8;
    let pass = oracle_pass && quad_pass && mass_pass;

    if config.json {
        print_json(&json!({
            "t": args.t,
            "d": pg.d(),
            "k": pg.k(),
            "oracle": {
                "evolver": oracle.evolver,
                "radius": oracle.radius,
                "entries": oracle.entries,
                "max_error": oracle.max_error,
                "worst": oracle.worst,
                "norm_defect": oracle.norm_defect,
                "tolerance": args.tolerance,
                "pass": oracle_pass,
            },
            "fiber_quadrature": {
                "entries": quad_entries,
                "max_error": quad_error,
                "tolerance": args.quadrature_tolerance,
                "pass": quad_pass,
            },
            "row_mass": {
                "max_defect": mass_defect,
                "pass": mass_pass,
            },
            "pass": pass,
        }));
    } else {
        println!("graph k={} d={} t={}", pg.k(), pg.d(), args.t);
        println!(
            "kernel vs {} evolution (L={}, {} entries): max error {:e}  {}",
            oracle.evolver,
            oracle.radius,
            oracle.entries,
            oracle.max_error,
            status(oracle_pass)
        );
        if let Some((nu, p, q)) = &oracle.worst {
            println!("  worst entry: offset {nu:?}, p={p}, q={q}; column norm defect {:e}", oracle.norm_defect);
        }
        println!(
            "kernel vs fiber quadrature ({quad_entries} entries): max error {quad_error:e}  {}",
            status(quad_pass)
        );
        println!("row mass defect: {mass_defect:e}  {}", status(mass_pass));
        println!("{}", if pass { "PASS" } else { "FAIL" });
    }
    if pass {
        Ok(())
    } else {
        Err(Failure::Check("kernel disagrees with an oracle".into()))
    }
}

fn scan(config: &RunConfig, args: &ScanArgs) -> CmdResult {
    require_finite("t-min", args.t_min)?;
    require_finite("t-max", args.t_max)?;
    if !(args.t_min > 0.0) {
        return Err(Failure::Usage(format!("--t-min must be positive, got {}", args.t_min)));
    }
    if args.t_min >= args.t_max {
        return Err(Failure::Usage(format!(
            "--t-min ({}) must be below --t-max ({})",
            args.t_min, args.t_max
        )));
    }
    if args.points < 2 {
        return Err(Failure::Usage("--points must be at least 2".into()));
    }
    let pg = product_graph(&args.graph)?;
    let grid = log_spaced(args.t_min, args.t_max, args.points);
    let result = dispersion_scan(&pg, &grid)?;

    let mut buffer = Vec::new();
    {
        let mut writer = csv::Writer::from_writer(&mut buffer);
        for p in &result.points {
            writer.serialize(p).map_err(|e| Failure::Usage(e.to_string()))?;
        }
        writer.flush().map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match &args.out {
        Some(path) => {
            std::fs::write(path, &buffer).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
            let summary = json!({
                "points": result.points.len(),
                "d": result.d,
                "max_scaled_sup": result.max_scaled_sup(),
                "envelope_constant": dispersion_envelope_constant(result.d),
                "out": path.display().to_string(),
            });
            if config.json {
                print_json(&summary);
            } else {
                println!(
                    "wrote {} points to {}; max sup_norm*t^(d/3) = {} <= {}",
                    result.points.len(),
                    path.display(),
                    result.max_scaled_sup(),
                    dispersion_envelope_constant(result.d)
                );
            }
        }
        None => std::io::stdout()
            .write_all(&buffer)
            .map_err(|e| Failure::Usage(e.to_string()))?,
    }
    Ok(())
}

fn fit(args: &FitArgs) -> CmdResult {
    let mut reader = csv::Reader::from_path(&args.input)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", args.input.display())))?;
    let points = reader
        .deserialize::<ScanPoint>()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::Usage(format!("{}: {e}", args.input.display())))?;
    let sup = || DecaySeries::new(points.iter().map(|p| (p.t, p.sup_norm)).collect());
    let series = match args.column.as_str() {
        "envelope" => DecaySeries::new(points.iter().map(|p| (p.t, p.envelope)).collect())?,
        "sup_norm" => sup()?,
        "upper" => sup()?.upper_envelope(),
        other => {
            return Err(Failure::Usage(format!(
                "--column must be envelope, sup_norm or upper, got `{other}`"
            )))
        }
    };
    let result = fit_decay_exponent(&series, args.t_min)?;
    println!("{}", serde_json::to_string_pretty(&result).expect("fit serializes"));
    Ok(())
}

fn no_dispersion(config: &RunConfig, args: &NoDispersionArgs) -> CmdResult {
    require_finite("t-max", args.t_max)?;
    if !(args.t_step > 0.0) || args.t_max < 0.0 {
        return Err(Failure::Usage("--t-step must be positive and --t-max nonnegative".into()));
    }
    let g = load_graph(&args.graph)?;
    let spectrum = Spectrum::of_graph(&g)?;
    let steps = (args.t_max / args.t_step).floor() as usize;
    let grid: Vec<f64> = (0..=steps).map(|i| i as f64 * args.t_step).collect();
    let report = finite_no_dispersion(&spectrum, args.source, &grid)?;
    if config.json {
        print_json(&json!({
            "k": spectrum.k(),
            "source": report.source,
            "grid_points": grid.len(),
            "lower_bound": report.lower_bound,
            "min_sup": report.min_sup,
            "t_at_min_sup": report.t_at_min_sup,
            "max_return": report.max_return,
            "t_at_max_return": report.t_at_max_return,
            "pass": true,
        }));
    } else {
        println!(
            "k={} source={} over {} times in [0, {}]",
            spectrum.k(),
            report.source,
            grid.len(),
            args.t_max
        );
        println!(
            "min ||psi_t||_inf = {} at t = {} (bound k^-1/2 = {})  PASS",
            report.min_sup, report.t_at_min_sup, report.lower_bound
        );
        println!(
            "max return amplitude |psi_t(source)| = {} at t = {}",
            report.max_return, report.t_at_max_return
        );
    }
    Ok(())
}
