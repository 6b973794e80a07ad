//! The `bmscale` command-line front end.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::directions::{self, Verdict};
use crate::element::{Ambient, Elem, Kind, Portrait};
use crate::error::{Error, Result};
use crate::perm::{Perm, PermGroup};
use crate::samples;
use crate::scale::{self, Caps};
use crate::semigroup::{check_scale_multiplicative, SemigroupSample};
use crate::tree::{sphere_size, CompleteSubtree, EdgeRef, Vertex};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CAP: i32 = 2;
pub const EXIT_UNKNOWN: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "bmscale", about = "Scale and asymptotic classes in groups acting on regular trees")]
pub struct Args {
    /// Group file with `degree`, `[F]` and `[Fprime]` sections.
    #[arg(long, global = true)]
    pub group: Option<PathBuf>,
    /// Walk depth for end comparisons; derived from the elements when absent.
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Emit `key=value` lines only.
    #[arg(long, global = true)]
    pub machine: bool,
    #[arg(long, global = true)]
    pub max_nodes: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Elliptic or hyperbolic, with the translation length.
    Classify { element: PathBuf },
    /// The scale with the pando data behind it.
    Scale { element: PathBuf },
    /// Singular vertices and the singular depth.
    Sing { element: PathBuf },
    /// `λ_g(v)` and its threshold.
    Lambda { element: PathBuf, vertex: String },
    /// Asymptotic verdict for two hyperbolic elements.
    Asym { first: PathBuf, second: PathBuf },
    /// The length function of `g^(-pn) h^(qn)` for `n` up to `n_max`, at the root edge of the given colour.
    Nlen {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        #[arg(long, default_value_t = 0)]
        colour: u8,
    },
    /// The default pando and its initial segment.
    Pando { element: PathBuf },
    /// Scale multiplicativity over words in the given generators.
    SemigroupCheck {
        #[arg(required = true)]
        elements: Vec<PathBuf>,
        #[arg(long, default_value_t = 3)]
        word_len: usize,
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// Runs the built-in invariant suite.
    Verify,
}

/// Parsed group file.
#[derive(Clone, Debug)]
pub struct GroupSpec {
    pub degree: usize,
    pub f_generators: Vec<Perm>,
    pub fprime_generators: Vec<Perm>,
    pub ambient: Arc<Ambient>,
}

impl GroupSpec {
    pub fn trimmed(&self) -> bool {
        self.ambient.trimmed()
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn perm_at(line: usize, s: &str) -> Result<Perm> {
    Perm::parse(s).map_err(|e| parse_err(line, e.to_string()))
}

pub fn parse_group_text(text: &str) -> Result<GroupSpec> {
    let mut degree = None;
    let mut section = None;
    let mut f_gens = Vec::new();
    let mut fp_gens = Vec::new();
    let mut fprime_seen = false;
    for (n, line) in content_lines(text) {
        if let Some(rest) = line.strip_prefix("degree") {
            let d: usize = rest.trim().parse().map_err(|_| parse_err(n, "degree must be an integer"))?;
            degree = Some(d);
        } else if line == "[F]" {
            section = Some(false);
        } else if line == "[Fprime]" {
            section = Some(true);
            fprime_seen = true;
        } else {
            let p = perm_at(n, line)?;
            let d = degree.ok_or_else(|| parse_err(n, "permutation before the degree line"))?;
            if p.degree() != d {
                return Err(parse_err(n, format!("permutation has degree {}, expected {d}", p.degree())));
            }
            match section {
                Some(false) => f_gens.push(p),
                Some(true) => fp_gens.push(p),
                None => return Err(parse_err(n, "permutation outside a section")),
            }
        }
    }
    let degree = degree.ok_or_else(|| parse_err(0, "missing degree line"))?;
    if !fprime_seen {
        fp_gens = f_gens.clone();
    }
    let f = PermGroup::enumerate(degree, &f_gens)?;
    let fp = PermGroup::enumerate(degree, &[f_gens.clone(), fp_gens.clone()].concat())?;
    let fp_alone = PermGroup::enumerate(degree, &fp_gens)?;
    if !f.is_subgroup_of(&fp_alone) {
        return Err(Error::Precondition("F is not contained in F′".into()));
    }
    let ambient = Ambient::new(f, fp)?;
    Ok(GroupSpec { degree, f_generators: f_gens, fprime_generators: fp_gens, ambient })
}

pub fn parse_group(path: &Path) -> Result<GroupSpec> {
    parse_group_text(&read(path)?)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Parses a portrait (`base`, `image`, `local` lines) or a word (`use <file> <±1>` lines).
pub fn parse_element_text(text: &str, amb: &Arc<Ambient>, dir: &Path) -> Result<Elem> {
    let d = amb.degree();
    let mut base = None;
    let mut image = None;
    let mut locals = BTreeMap::new();
    let mut word: Vec<Elem> = Vec::new();
    for (n, line) in content_lines(text) {
        let mut parts = line.splitn(2, char::is_whitespace);
        let key = parts.next().unwrap_or("");
        let rest = parts.next().unwrap_or("").trim();
        let vertex = |s: &str| Vertex::parse(s, d).map_err(|e| parse_err(n, e.to_string()));
        match key {
            "base" => base = Some(vertex(rest)?),
            "image" => image = Some(vertex(rest)?),
            "local" => {
                let mut it = rest.splitn(2, char::is_whitespace);
                let v = vertex(it.next().unwrap_or(""))?;
                let p = perm_at(n, it.next().unwrap_or(""))?;
                locals.insert(v, p);
            }
            "use" => {
                let mut it = rest.split_whitespace();
                let file = it.next().ok_or_else(|| parse_err(n, "missing file"))?;
                let sign = it.next().ok_or_else(|| parse_err(n, "missing exponent"))?;
                let e = parse_element(&dir.join(file), amb)?;
                match sign {
                    "+1" | "1" => word.push(e),
                    "-1" => word.push(e.inv()),
                    _ => return Err(parse_err(n, format!("exponent `{sign}` is not ±1"))),
                }
            }
            _ => return Err(parse_err(n, format!("unknown directive `{key}`"))),
        }
    }
    if !word.is_empty() {
        if base.is_some() || image.is_some() || !locals.is_empty() {
            return Err(parse_err(0, "a file is either a portrait or a word"));
        }
        return Ok(word.iter().fold(Elem::identity(amb), |acc, e| acc.mul(e)));
    }
    let base = base.unwrap_or_else(Vertex::root);
    let image = image.ok_or_else(|| parse_err(0, "missing image line"))?;
    Ok(Elem::from_portrait(Portrait::new(amb, base, image, locals)?))
}

pub fn parse_element(path: &Path, amb: &Arc<Ambient>) -> Result<Elem> {
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_element_text(&read(path)?, amb, &dir)
}

/// Collects output lines and the exit status of a command.
struct Report {
    machine: bool,
    out: String,
    status: i32,
}

impl Report {
    fn kv(&mut self, key: &str, value: impl std::fmt::Display) {
        if self.machine {
            let _ = writeln!(self.out, "{key}={value}");
        } else {
            let _ = writeln!(self.out, "{key}: {value}");
        }
    }

    fn line(&mut self, s: impl std::fmt::Display) {
        let _ = writeln!(self.out, "{s}");
    }

    fn verdict(&mut self, v: &Verdict, depth: usize) {
        self.line(format!("asymptotic={} depth={depth} certificate={}", v.label(), v.certificate_kind()));
        if v.is_unknown() {
            self.status = EXIT_UNKNOWN;
        }
    }
}

fn error_status(e: &Error) -> i32 {
    match e {
        Error::CapExceeded(_) => EXIT_CAP,
        _ => EXIT_FAILURE,
    }
}

/// Runs the command line `argv` (program name first), writing to `out`; returns the exit status.
pub fn run(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_FAILURE } else { EXIT_OK };
        }
    };
    let mut report = Report { machine: args.machine, out: String::new(), status: EXIT_OK };
    let status = match dispatch(&args, &mut report, err) {
        Ok(()) => report.status,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            error_status(&e)
        }
    };
    let _ = out.write_all(report.out.as_bytes());
    status
}

pub fn main() -> i32 {
    let argv: Vec<String> = std::env::args().collect();
    run(&argv, &mut std::io::stdout(), &mut std::io::stderr())
}

fn caps(args: &Args) -> Caps {
    let mut c = Caps::default();
    if let Some(n) = args.max_nodes {
        c.max_nodes = n;
    }
    c
}

fn dispatch(args: &Args, r: &mut Report, err: &mut dyn Write) -> Result<()> {
    if let Command::Verify = args.command {
        return verify(args.seed, r);
    }
    let path = args.group.as_ref().ok_or_else(|| Error::Precondition("--group is required".into()))?;
    let spec = parse_group(path)?;
    if spec.trimmed() {
        let _ = writeln!(err, "warning: F′ replaced by its intersection with F̂");
    }
    let amb = spec.ambient.clone();
    let load = |p: &PathBuf| parse_element(p, &amb);
    let caps = caps(args);
    match &args.command {
        Command::Classify { element } => {
            let g = load(element)?;
            let c = g.classify();
            r.kv("kind", if c.kind == Kind::Hyperbolic { "hyperbolic" } else { "elliptic" });
            r.kv("length", c.length);
            if let Some(b) = &c.axis_base {
                r.kv("axis_base", b);
            }
            if let Some(v) = &c.fixed_vertex {
                r.kv("fixed_vertex", v);
            }
            if let Some(e) = &c.inverted_edge {
                r.kv("inverted_edge", format!("{}:{}", e.origin, e.colour));
            }
        }
        Command::Scale { element } => {
            let g = load(element)?;
            let rep = scale::scale_report(&g, &caps)?;
            r.kv("scale", &rep.scale);
            r.kv("numerator", &rep.numerator);
            r.kv("m_size", &rep.m_size);
            r.kv("pando_int", rep.pando_int);
        }
        Command::Sing { element } => {
            let g = load(element)?;
            let sing: Vec<String> = g.singularities().iter().map(|v| v.to_string()).collect();
            r.kv("count", sing.len());
            r.kv("singular", if sing.is_empty() { "none".to_string() } else { sing.join(",") });
            if g.is_hyperbolic() {
                r.kv("depth", g.sing_depth()?);
            }
        }
        Command::Lambda { element, vertex } => {
            let g = load(element)?;
            let v = Vertex::parse(vertex, amb.degree())?;
            let (coset, h) = directions::lambda(&g, &v)?;
            r.kv("lambda", coset.representative());
            r.kv("trivial", coset.is_trivial());
            r.kv("threshold", h);
        }
        Command::Asym { first, second } => {
            let (g, h) = (load(first)?, load(second)?);
            let depth = match args.depth {
                Some(d) => d,
                None => directions::default_depth(&g, &h)?,
            };
            let v = directions::asymptotic(&g, &h, depth)?;
            r.verdict(&v, depth);
        }
        Command::Nlen { first, second, n_max, colour } => {
            let (g, h) = (load(first)?, load(second)?);
            let e = EdgeRef::new(Vertex::root(), *colour);
            let (p, q) = directions::matched_powers(&g, &h);
            r.kv("powers", format!("{p},{q}"));
            let values = directions::length_diagnostic(&g, &h, p, q, *n_max, &e);
            for (i, v) in values.iter().enumerate() {
                r.line(format!("n={} nlen={v}", i + 1));
            }
            let shape = match directions::growth(&values) {
                directions::Growth::Bounded => "bounded",
                directions::Growth::Unbounded => "unbounded",
                directions::Growth::Inconclusive => "inconclusive",
            };
            r.kv("growth", shape);
        }
        Command::Pando { element } => {
            let g = load(element)?;
            let p = scale::make_pando(&g, args.depth)?;
            let p0 = p.initial_segment();
            r.kv("window", format!("{},{}", p.window.0, p.window.1));
            r.kv("depth", p.depth);
            r.kv("vertices", p.tree.len());
            r.kv("pando_int", p.tree.internal().len());
            r.kv("initial_int", p0.internal().len());
        }
        Command::SemigroupCheck { elements, word_len, samples } => {
            let gens = elements.iter().map(load).collect::<Result<Vec<_>>>()?;
            let sample = SemigroupSample::new_with(gens, *word_len, caps)?;
            let rep = check_scale_multiplicative(&sample, *samples, args.seed)?;
            for c in &rep.checks {
                r.line(c);
            }
            r.kv("result", if rep.passed() { "mult" } else { "nonmult" });
            if !rep.passed() {
                r.status = EXIT_FAILURE;
            }
        }
        Command::Verify => unreachable!("handled above"),
    }
    Ok(())
}

/// One line per check; fails the run if any check fails.
fn verify(seed: u64, r: &mut Report) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut all = true;
    let mut check = |r: &mut Report, name: &str, ok: Result<bool>| {
        let (res, detail) = match ok {
            Ok(true) => ("pass", String::new()),
            Ok(false) => ("fail", String::new()),
            Err(e) => ("fail", format!(" error={e}")),
        };
        all &= res == "pass";
        r.line(format!("check={name} result={res}{detail}"));
    };

    let spheres = (|| {
        for d in 3..=5usize {
            for k in 0..=4u32 {
                let edge = [Vertex::root(), Vertex::root().step(0)];
                let ball = CompleteSubtree::ball(d, &Vertex::root(), k as usize + 1);
                let count = ball
                    .vertices()
                    .iter()
                    .filter(|v| edge.iter().map(|e| e.distance(v)).min() == Some(k as usize))
                    .count();
                if sphere_size(d, k) != BigUint::from(count) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    })();
    check(r, "sphere", spheres);

    let translations = (|| {
        for (d, base) in [(3usize, 2u32), (4, 3)] {
            let amb = samples::universal(samples::symmetric(d));
            let t = crate::element::translation_along(&amb, &Vertex::root(), 0, 1)?;
            for l in 1..=3i64 {
                if scale::scale(&t.pow(l))? != BigUint::from(base).pow(l as u32) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    })();
    check(r, "translation-scale", translations);

    let closed = (|| {
        for f in [samples::symmetric(3), samples::alternating4(), samples::dihedral4()] {
            let amb = samples::universal(f);
            for _ in 0..4 {
                let g = samples::random_hyperbolic(&mut rng, &amb, 2, 0)?;
                if scale::scale_closed_form_uf(&g)? != scale::scale(&g)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    })();
    check(r, "closed-form", closed);

    let powers = (|| {
        let caps = Caps::generous();
        let tw = samples::planted_twist();
        let s = scale::scale_with(&tw.g, &caps)?;
        for n in 1..=3u32 {
            if scale::scale_with(&tw.g.pow(n as i64), &caps)? != s.pow(n) {
                return Ok(false);
            }
        }
        let x = samples::random_elem(&mut rng, &tw.amb, 2, 1)?;
        Ok(scale::scale_with(&tw.g.conjugate_by(&x), &caps)? == s)
    })();
    check(r, "power-conjugation", powers);

    let fprime = (|| {
        let f = samples::double_transposition();
        let wide = Ambient::new(f.clone(), samples::symmetric(4))?;
        let narrow = Ambient::new(f.clone(), f.young_subgroup()?)?;
        let a = samples::intransitive_planted(&wide)?;
        let b = samples::intransitive_planted(&narrow)?;
        Ok(scale::scale(&a)? == scale::scale(&b)?)
    })();
    check(r, "fprime-independence", fprime);

    let asym = (|| {
        let tw = samples::planted_twist();
        let g2 = tw.g.pow(2);
        let depth = directions::default_depth(&tw.g, &g2)?;
        let same = directions::asymptotic(&tw.g, &g2, depth)?.is_equal();
        let depth = directions::default_depth(&tw.g, &tw.t)?;
        let twisted = directions::asymptotic(&tw.g, &tw.t, depth)?.is_not_equal();
        Ok(same && twisted)
    })();
    check(r, "asymptotic", asym);

    let lambda_laws = (|| {
        let tw = samples::planted_twist();
        let f = tw.amb.f();
        for _ in 0..20 {
            let v = tw.g.axis_vertex(rand::Rng::gen_range(&mut rng, -2..6))?;
            let (gv, s) = tw.g.eval_local(&v);
            if directions::lambda(&tw.g, &gv)?.0 != directions::lambda(&tw.g, &v)?.0.left_translate(&s, f) {
                return Ok(false);
            }
        }
        Ok(true)
    })();
    check(r, "lambda-cocycle", lambda_laws);

    let uniscalar = (|| {
        let amb = samples::universal(samples::cyclic4());
        match scale::uniscalar_witness(&amb)? {
            Some(w) => Ok(w.is_hyperbolic() && scale::scale(&w)? == BigUint::from(1u32)),
            None => Ok(false),
        }
    })();
    check(r, "uniscalar-witness", uniscalar);

    r.line(format!("seed={seed} result={}", if all { "pass" } else { "fail" }));
    if !all {
        r.status = EXIT_FAILURE;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const A4: &str = "degree 4\n[F]\n1 2 0 3\n0 2 3 1\n[Fprime]\n1 0 2 3\n0 2 3 1\n";

    #[test]
    fn group_file_sections() {
        let spec = parse_group_text(A4).unwrap();
        assert_eq!(spec.degree, 4);
        assert_eq!(spec.ambient.f().order(), 12);
        assert_eq!(spec.ambient.fprime().order(), 24);
        assert!(!spec.trimmed());
    }

    #[test]
    fn fprime_defaults_to_f() {
        let spec = parse_group_text("# sym3\ndegree 3\n[F]\n1 0 2\n1 2 0\n").unwrap();
        assert_eq!(spec.ambient.fprime().order(), 6);
    }

    #[test]
    fn parse_errors_carry_lines() {
        let err = parse_group_text("degree 3\n[F]\n1 1 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        assert!(matches!(parse_group_text("[F]\n1 0 2\n").unwrap_err(), Error::Parse { line: 2, .. }));
    }

    #[test]
    fn portrait_text() {
        let spec = parse_group_text(A4).unwrap();
        let g = parse_element_text("base -\nimage 0\nlocal - 1 0 2 3\n", &spec.ambient, Path::new(".")).unwrap();
        assert_eq!(g.eval(&Vertex::root()), Vertex::root().step(0));
        assert!(matches!(
            parse_element_text("image 0\nfrobnicate\n", &spec.ambient, Path::new(".")),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn verify_is_deterministic() {
        let argv: Vec<String> = ["bmscale", "verify", "--seed", "3", "--machine"].iter().map(|s| s.to_string()).collect();
        let (mut a, mut b, mut err) = (Vec::new(), Vec::new(), Vec::new());
        assert_eq!(run(&argv, &mut a, &mut err), EXIT_OK);
        assert_eq!(run(&argv, &mut b, &mut err), EXIT_OK);
        assert_eq!(a, b);
    }
}
