//! `fourpi`: batch front-end for the free-space photon-atom coupling
//! simulator. Every subcommand prints one deterministic report to
//! stdout and mirrors it into `--outdir` when given; exit status 2
//! flags bad invocations, 1 numeric failures.

use clap::{value_parser, Arg, ArgMatches, Command};

mod commands;
mod config;
mod reproduce;

use config::{Overlay, UsageError};

fn num_arg(name: &'static str, help: &'static str, default: &'static str) -> Arg {
    Arg::new(name)
        .long(name)
        .value_name("X")
        .value_parser(value_parser!(f64))
        .default_value(default)
        .help(help)
}

fn opt_num_arg(name: &'static str, help: &'static str) -> Arg {
    Arg::new(name)
        .long(name)
        .value_name("X")
        .value_parser(value_parser!(f64))
        .help(help)
}

fn count_arg(name: &'static str, help: &'static str, default: &'static str) -> Arg {
    Arg::new(name)
        .long(name)
        .value_name("N")
        .value_parser(value_parser!(usize))
        .default_value(default)
        .help(help)
}

fn dipole_arg() -> Arg {
    Arg::new("dipole")
        .long("dipole")
        .value_parser(["pi", "sigma"])
        .default_value("pi")
        .help("Dipole pattern the beam should match")
}

fn mirror_args(cmd: Command) -> Command {
    cmd.arg(num_arg("f", "Mirror focal length", "1.0"))
        .arg(num_arg("depth", "Mirror depth, same unit as f", "6.0"))
}

fn cli() -> Command {
    Command::new("fourpi")
        .about("Free-space photon-atom coupling through a deep parabolic mirror")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(
            Arg::new("config")
                .long("config")
                .global(true)
                .value_name("FILE")
                .help("Flat key=value config file; flags override it"),
        )
        .arg(
            Arg::new("outdir")
                .long("outdir")
                .global(true)
                .value_name("DIR")
                .help("Mirror reports into this directory (or set FOURPI_OUTDIR)"),
        )
        .arg(
            Arg::new("format")
                .long("format")
                .global(true)
                .value_parser(["csv", "json"])
                .help("Report format; tables default to csv, reports to json"),
        )
        .subcommand(
            mirror_args(Command::new("coverage"))
                .about("Weighted solid-angle coverage of the mirror, single depth or sweep")
                .arg(dipole_arg())
                .arg(opt_num_arg("depth-min", "Sweep start depth"))
                .arg(opt_num_arg("depth-max", "Sweep end depth"))
                .arg(count_arg("steps", "Sweep point count", "33")),
        )
        .subcommand(
            mirror_args(Command::new("profile"))
                .about("Ideal radial intensity profile of the matched input beam")
                .arg(dipole_arg())
                .arg(count_arg("samples", "Radial sample count", "512")),
        )
        .subcommand(
            mirror_args(Command::new("overlap"))
                .about("Spatial coupling efficiency of a pupil field, as a coupling report")
                .arg(dipole_arg())
                .arg(count_arg("samples", "Radial sample count", "8193"))
                .arg(
                    Arg::new("aberration")
                        .long("aberration")
                        .value_name("FILE")
                        .help("Pupil phase map CSV (rho,phi,phase_rad)"),
                )
                .arg(
                    Arg::new("polarization")
                        .long("polarization")
                        .value_parser(["radial", "circular"])
                        .help("Pupil polarization [default: matches the dipole]"),
                )
                .arg(opt_num_arg(
                    "hole-efficiency",
                    "Redirection efficiency of an axial element covering the rear hole",
                )),
        )
        .subcommand(
            Command::new("excite")
                .about("Excitation dynamics for a single-photon pulse, or a bandwidth sweep")
                .arg(
                    Arg::new("shape")
                        .long("shape")
                        .value_parser(["rising", "falling", "gaussian"])
                        .default_value("rising")
                        .help("Pulse envelope family"),
                )
                .arg(num_arg(
                    "time-constant",
                    "Intensity 1/e time in lifetimes",
                    "1.0",
                ))
                .arg(num_arg("eta", "Spatial coupling efficiency", "1.0"))
                .arg(num_arg("detuning", "Detuning in linewidths", "0.0"))
                .arg(num_arg("wavelength", "Transition wavelength, m", "657e-9"))
                .arg(num_arg("gamma", "Spontaneous decay rate, 1/s", "2500.0"))
                .arg(opt_num_arg("window-start", "Window start in lifetimes"))
                .arg(opt_num_arg("window-end", "Window end in lifetimes"))
                .arg(opt_num_arg("sweep-min", "Sweep start time constant"))
                .arg(opt_num_arg("sweep-max", "Sweep end time constant"))
                .arg(count_arg("sweep-points", "Sweep point count", "25")),
        )
        .subcommand(
            Command::new("cavity")
                .about("Cavity figures of merit and their free-space identity check")
                .arg(num_arg("lambda", "Wavelength, m", "1e-6"))
                .arg(num_arg("w0", "Mode waist, m", "1e-5"))
                .arg(
                    Arg::new("reflectivity")
                        .long("reflectivity")
                        .visible_alias("R")
                        .value_name("X")
                        .value_parser(value_parser!(f64))
                        .default_value("0.99999")
                        .help("Mirror reflectivity in [0, 1)"),
                )
                .arg(num_arg("length", "Cavity length, m", "1e-3"))
                .arg(num_arg("gamma", "Spontaneous decay rate, 1/s", "1e6")),
        )
        .subcommand(
            Command::new("transitions")
                .about("Closed two-level transition registry and checker")
                .arg(
                    Arg::new("action")
                        .value_parser(["list", "check"])
                        .default_value("list")
                        .help("list the registry or check each entry"),
                ),
        )
        .subcommand(Command::new("reproduce").about(
            "Run the full acceptance table, print PASS/FAIL lines, and write the \
                 canonical artifacts (outdir defaults to ./artifacts)",
        ))
}

fn run(matches: &ArgMatches) -> anyhow::Result<()> {
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let overlay = Overlay::load(sub)?;
    match name {
        "coverage" => commands::coverage(sub, &overlay),
        "profile" => commands::profile(sub, &overlay),
        "overlap" => commands::overlap(sub, &overlay),
        "excite" => commands::excite(sub, &overlay),
        "cavity" => commands::cavity(sub, &overlay),
        "transitions" => commands::transitions(sub, &overlay),
        "reproduce" => reproduce::run(sub, &overlay),
        other => unreachable!("unknown subcommand {other}"),
    }
}

fn main() {
    let matches = cli().get_matches();
    if let Err(err) = run(&matches) {
        if err.downcast_ref::<UsageError>().is_some() {
            eprintln!("error: {err}");
            std::process::exit(2);
        }
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
