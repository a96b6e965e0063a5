//! `orbifold` — exact orbifold characters of lattice VOAs from the command
//! line.

use clap::{Parser, Subcommand};
use orbifold_cli::groupspec::GroupSpec;
use orbifold_cli::lattice_file::{parse_lattice, LatticeFile};
use orbifold_cli::{cache, exit_code_for, report};
use orbifold_core::characters::*;
use orbifold_core::cyclotomic::Cyclotomic;
use orbifold_core::intmat::{smith_normal_form, IMat};
use orbifold_core::lattice::{analyze_automorphism, LatticeMap};
use orbifold_core::lifting::{split_lift_semidirect, standard_lift, Lift};
use orbifold_core::qseries::QSeries;
use orbifold_core::twisted::build_twisted_module;
use orbifold_core::znum::{Int, Rat};
use orbifold_core::{Error, Result};
use serde_json::json;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "orbifold", about = "exact orbifold characters of lattice vertex algebras")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// truncation order of q-expansions, e.g. 2 or 5/2
    #[arg(long, global = true, default_value = "2")]
    order: String,
    /// character cache directory
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// output format
    #[arg(long, global = true, default_value = "text")]
    format: String,
    /// user-supplied full-lattice theta series file (rank >= 24)
    #[arg(long, global = true)]
    theta: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Smith normal form of an integer matrix
    Snf {
        /// rows separated by ';', entries by spaces: "2 4; 6 8"
        #[arg(long)]
        matrix: String,
    },
    /// Cycle type, fixed/coinvariant data of a named automorphism
    Analyze { lattice: PathBuf, name: String },
    /// Standard lift data of a named automorphism
    Lift { lattice: PathBuf, name: String },
    /// Splitting lift for a semidirect group spec
    SplitLift {
        lattice: PathBuf,
        #[arg(long)]
        group: String,
    },
    /// Twisted-module data for a named automorphism
    Twisted { lattice: PathBuf, name: String },
    /// Twining character T(g, h) ('e' = identity)
    Twining { lattice: PathBuf, g: String, h: String },
    /// Type r = N² ρ mod N of a cyclic sector
    Type { lattice: PathBuf, name: String },
    /// Anomaly verdict for a group spec
    Anomaly {
        lattice: PathBuf,
        #[arg(long)]
        group: String,
    },
    /// Orbifold character for a group spec
    Orbifold {
        lattice: PathBuf,
        #[arg(long)]
        group: String,
    },
    /// Irreducible-module characters (cyclic or s3 demo groups)
    Modules {
        lattice: PathBuf,
        #[arg(long)]
        group: String,
    },
    /// Modular S and T matrices (cyclic type-0, or the s3 demo)
    Stmatrices {
        lattice: PathBuf,
        #[arg(long)]
        group: String,
    },
    /// Invariant-dimension bounds for abelian Heisenberg actions
    Bounds {
        /// use all primitive eigenvalues of this order
        #[arg(long)]
        primitive: Option<u64>,
        /// trivial action in this dimension
        #[arg(long)]
        trivial: Option<usize>,
        /// file with one comma-separated rational exponent vector per line
        #[arg(long)]
        file: Option<PathBuf>,
    },
}

fn parse_order(s: &str) -> Result<Rat> {
    let parse = |t: &str| -> Option<Int> { t.trim().parse().ok() };
    if let Some((n, d)) = s.split_once('/') {
        let n = parse(n).ok_or_else(|| Error::ParseError(format!("bad order: {s}")))?;
        let d = parse(d).ok_or_else(|| Error::ParseError(format!("bad order: {s}")))?;
        Ok(Rat::new(n, d))
    } else {
        let n = parse(s).ok_or_else(|| Error::ParseError(format!("bad order: {s}")))?;
        Ok(Rat::from_integer(n))
    }
}

fn load(path: &PathBuf) -> Result<LatticeFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::ParseError(format!("{}: {e}", path.display())))?;
    parse_lattice(&text)
}

fn named_lift(file: &LatticeFile, name: &str) -> Result<Lift> {
    if name == "e" {
        return Ok(Lift::identity(file.lattice.rank));
    }
    let map = file
        .maps
        .get(name)
        .ok_or_else(|| Error::ValidationError(format!("unknown automorphism '{name}'")))?;
    let sl = standard_lift(&file.lattice, map)?;
    if sl.doubled {
        return Err(Error::OrderDoubled(name.to_string()));
    }
    Ok(sl.lift)
}

fn load_theta(path: &Option<PathBuf>) -> Result<Option<QSeries>> {
    match path {
        None => Ok(None),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::ParseError(format!("{}: {e}", p.display())))?;
            Ok(Some(QSeries::from_text(&text)?))
        }
    }
}

fn require_theta_for_large_rank(rank: usize, theta: &Option<QSeries>) -> Result<()> {
    if rank >= 24 && theta.is_none() {
        return Err(Error::ValidationError(
            "rank >= 24: supply the full-lattice theta series with --theta".into(),
        ));
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<i32> {
    let order = parse_order(&cli.order)?;
    let json_out = cli.format == "json";
    match &cli.command {
        Cmd::Snf { matrix } => {
            let rows: Vec<Vec<Int>> = matrix
                .split(';')
                .map(|r| {
                    r.split_whitespace()
                        .map(|t| {
                            t.parse::<Int>()
                                .map_err(|_| Error::ParseError(format!("bad entry: {t}")))
                        })
                        .collect::<Result<Vec<Int>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            let width = rows.first().map(|r| r.len()).unwrap_or(0);
            if rows.is_empty() || rows.iter().any(|r| r.len() != width) {
                return Err(Error::ParseError("ragged or empty matrix".into()));
            }
            let a = IMat::from_rows(rows);
            let snf = smith_normal_form(&a);
            let divisors: Vec<String> = snf.divisors.iter().map(|d| d.to_string()).collect();
            if json_out {
                println!(
                    "{}",
                    json!({"command": "snf", "divisors": divisors, "nullity": snf.nullity})
                );
            } else {
                println!("{}", divisors.join(", "));
            }
        }
        Cmd::Analyze { lattice, name } => {
            let file = load(lattice)?;
            let map = file
                .maps
                .get(name)
                .ok_or_else(|| Error::ValidationError(format!("unknown automorphism '{name}'")))?;
            let data = analyze_automorphism(&file.lattice, map)?;
            let ct: Vec<String> =
                data.cycle_type.iter().map(|(t, b)| format!("{t}^{b}")).collect();
            if json_out {
                println!(
                    "{}",
                    json!({
                        "command": "analyze",
                        "order": data.order,
                        "cycle_type": ct,
                        "fixed_rank": data.fixed_basis.len(),
                        "coinvariant_rank": data.coinvariant_basis.len(),
                        "divisors": data.divisors.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
                        "conformal_weight": data.conformal_weight().to_string(),
                    })
                );
            } else {
                println!("order {}", data.order);
                println!("cycle type {}", ct.join(" "));
                println!("fixed rank {}", data.fixed_basis.len());
                println!("coinvariant rank {}", data.coinvariant_basis.len());
                let ds: Vec<String> = data.divisors.iter().map(|d| d.to_string()).collect();
                println!("divisors {}", ds.join(", "));
                println!("conformal weight {}", data.conformal_weight());
            }
        }
        Cmd::Lift { lattice, name } => {
            let file = load(lattice)?;
            let map = file
                .maps
                .get(name)
                .ok_or_else(|| Error::ValidationError(format!("unknown automorphism '{name}'")))?;
            let sl = standard_lift(&file.lattice, map)?;
            if json_out {
                println!(
                    "{}",
                    json!({"command": "lift", "order": sl.order, "doubled": sl.doubled})
                );
            } else {
                println!("standard lift of {name}: order {}, doubled {}", sl.order, sl.doubled);
            }
        }
        Cmd::SplitLift { lattice, group } => {
            let file = load(lattice)?;
            let spec = GroupSpec::parse(group)?;
            match spec {
                GroupSpec::Semidirect { q, p, phi, a, big_a } => {
                    let am = file.maps.get(&a).ok_or_else(|| {
                        Error::ValidationError(format!("unknown automorphism '{a}'"))
                    })?;
                    let bm = file.maps.get(&big_a).ok_or_else(|| {
                        Error::ValidationError(format!("unknown automorphism '{big_a}'"))
                    })?;
                    let (_, _) = split_lift_semidirect(&file.lattice, bm, am, phi, q, p)?;
                    if json_out {
                        println!("{}", json!({"command": "split-lift", "status": "ok"}));
                    } else {
                        println!("splitting lift found for {group}");
                    }
                }
                _ => {
                    return Err(Error::ValidationError(
                        "split-lift needs a semidirect group spec".into(),
                    ))
                }
            }
        }
        Cmd::Twisted { lattice, name } => {
            let file = load(lattice)?;
            let lift = named_lift(&file, name)?;
            let w = build_twisted_module(&file.lattice, &lift)?;
            let r = type_of(&w)?;
            let orders: Vec<String> = w.quotient.orders.iter().map(|o| o.to_string()).collect();
            let pairs: Vec<u64> = w.darboux.pairs.iter().map(|p| p.order).collect();
            if json_out {
                println!(
                    "{}",
                    json!({
                        "command": "twisted",
                        "dimension": w.dim,
                        "conformal_weight": w.rho.to_string(),
                        "type": r,
                        "quotient_orders": orders,
                        "darboux_pair_orders": pairs,
                    })
                );
            } else {
                println!("d(g) = {}", w.dim);
                println!("conformal weight {}", w.rho);
                println!("type {r}");
                println!("quotient orders {}", orders.join(", "));
                let ps: Vec<String> = pairs.iter().map(|p| p.to_string()).collect();
                println!("darboux pair orders {}", ps.join(", "));
            }
        }
        Cmd::Twining { lattice, g, h } => {
            let file = load(lattice)?;
            let theta = load_theta(&cli.theta)?;
            let glift = named_lift(&file, g)?;
            let hlift = named_lift(&file, h)?;
            let series = if g == "e" {
                require_theta_for_large_rank(file.lattice.rank, &theta)?;
                if h == "e" {
                    untwisted_character_closed(
                        &file.lattice,
                        &LatticeMap::identity(file.lattice.rank),
                        &order,
                        theta.as_ref(),
                    )?
                } else {
                    twining_character(&file.lattice, &glift, &hlift, &order)?
                }
            } else {
                let key = CharacterCache::key(&file.lattice, &glift, &hlift, &order);
                let disk = match &cli.cache {
                    Some(dir) => Some(cache::DiskCache::new(dir)?),
                    None => None,
                };
                if let Some(d) = &disk {
                    if let Some(hit) = d.get(&key)? {
                        print_series(&hit, json_out, "twining (cached)");
                        return Ok(0);
                    }
                }
                let s = twining_character(&file.lattice, &glift, &hlift, &order)?;
                if let Some(d) = &disk {
                    d.put(&key, &s)?;
                }
                s
            };
            print_series(&series, json_out, "twining");
        }
        Cmd::Type { lattice, name } => {
            let file = load(lattice)?;
            let map = file
                .maps
                .get(name)
                .ok_or_else(|| Error::ValidationError(format!("unknown automorphism '{name}'")))?;
            let r = sector_type(&file.lattice, map)?;
            if json_out {
                println!("{}", json!({"command": "type", "r": r}));
            } else {
                println!("type {r}");
            }
        }
        Cmd::Anomaly { lattice, group } => {
            let file = load(lattice)?;
            let spec = GroupSpec::parse(group)?;
            let report = match &spec {
                GroupSpec::Cyclic { g } => {
                    let m = file.maps.get(g).ok_or_else(|| {
                        Error::ValidationError(format!("unknown automorphism '{g}'"))
                    })?;
                    anomaly_check(&file.lattice, &GroupShape::Cyclic { g: m })?
                }
                GroupSpec::Semidirect { q, p, phi, a, big_a } => {
                    let am = file.maps.get(a).ok_or_else(|| {
                        Error::ValidationError(format!("unknown automorphism '{a}'"))
                    })?;
                    let bm = file.maps.get(big_a).ok_or_else(|| {
                        Error::ValidationError(format!("unknown automorphism '{big_a}'"))
                    })?;
                    anomaly_check(
                        &file.lattice,
                        &GroupShape::Semidirect { a: am, big_a: bm, q: *q, p: *p, phi: *phi },
                    )?
                }
                GroupSpec::Product { p, a, big_a } => {
                    let am = file.maps.get(a).ok_or_else(|| {
                        Error::ValidationError(format!("unknown automorphism '{a}'"))
                    })?;
                    let bm = file.maps.get(big_a).ok_or_else(|| {
                        Error::ValidationError(format!("unknown automorphism '{big_a}'"))
                    })?;
                    anomaly_check(&file.lattice, &GroupShape::Product { a: am, big_a: bm, p: *p })?
                }
            };
            let verdict = match report.verdict {
                AnomalyVerdict::Trivial => "trivial",
                AnomalyVerdict::Anomalous => "anomalous",
                AnomalyVerdict::Undecided => "undecided",
            };
            let types: Vec<String> = report
                .subgroup_types
                .iter()
                .map(|(l, r, _)| format!("r_{l}={r}"))
                .collect();
            if json_out {
                println!(
                    "{}",
                    json!({
                        "command": "anomaly",
                        "verdict": verdict,
                        "subgroup_types": report.subgroup_types.iter()
                            .map(|(l, r, n)| json!({"label": l, "r": r, "order": n}))
                            .collect::<Vec<_>>(),
                    })
                );
            } else {
                println!("{verdict} ({})", types.join(", "));
            }
            if report.verdict == AnomalyVerdict::Anomalous {
                // informational command: still exit 0; orbifold refuses instead
            }
        }
        Cmd::Orbifold { lattice, group } => {
            let file = load(lattice)?;
            let theta = load_theta(&cli.theta)?;
            require_theta_for_large_rank(file.lattice.rank, &theta)?;
            let spec = GroupSpec::parse(group)?;
            let rep = match &spec {
                GroupSpec::Cyclic { g } => {
                    let m = file.maps.get(g).ok_or_else(|| {
                        Error::ValidationError(format!("unknown automorphism '{g}'"))
                    })?;
                    let chi = cyclic_orbifold_char_with_theta(
                        &file.lattice,
                        m,
                        &order,
                        theta.as_ref(),
                    )?;
                    let summary = summary_line(&chi);
                    OrbifoldReport {
                        group: format!("Z{}", m.order()?),
                        class_types: vec![(g.clone(), sector_type(&file.lattice, m)?, m.order()?)],
                        anomaly: AnomalyVerdict::Trivial,
                        character: chi,
                        summary,
                    }
                }
                GroupSpec::Semidirect { q, p, phi, a, big_a } => {
                    let am = file.maps.get(a).ok_or_else(|| {
                        Error::ValidationError(format!("unknown automorphism '{a}'"))
                    })?;
                    let bm = file.maps.get(big_a).ok_or_else(|| {
                        Error::ValidationError(format!("unknown automorphism '{big_a}'"))
                    })?;
                    effcyc_orbifold_char_with_theta(
                        &file.lattice,
                        am,
                        bm,
                        *q,
                        *p,
                        *phi,
                        &order,
                        theta.as_ref(),
                    )?
                }
                GroupSpec::Product { a, big_a, .. } => {
                    let am = file.maps.get(a).ok_or_else(|| {
                        Error::ValidationError(format!("unknown automorphism '{a}'"))
                    })?;
                    let bm = file.maps.get(big_a).ok_or_else(|| {
                        Error::ValidationError(format!("unknown automorphism '{big_a}'"))
                    })?;
                    general_orbifold_char(
                        &file.lattice,
                        &[(a.clone(), am.clone()), (big_a.clone(), bm.clone())],
                        &order,
                    )?
                }
            };
            if json_out {
                println!(
                    "{}",
                    json!({
                        "command": "orbifold",
                        "group": rep.group,
                        "summary": rep.summary,
                        "class_types": rep.class_types.iter()
                            .map(|(l, r, n)| json!({"label": l, "r": r, "order": n}))
                            .collect::<Vec<_>>(),
                        "character": report::series_out(&rep.character),
                    })
                );
            } else {
                println!("group {}", rep.group);
                println!("summary {}", rep.summary);
                println!("character {}", report::series_text(&rep.character));
            }
        }
        Cmd::Modules { lattice, group } => {
            let file = load(lattice)?;
            let spec = GroupSpec::parse(group)?;
            let out = modules_command(&file, &spec, &order)?;
            if json_out {
                println!(
                    "{}",
                    json!({
                        "command": "modules",
                        "labels": out.iter().map(|(l, _)| l.clone()).collect::<Vec<_>>(),
                        "characters": out.iter().map(|(_, s)| report::series_out(s)).collect::<Vec<_>>(),
                    })
                );
            } else {
                for (label, s) in &out {
                    println!("{label}: {}", report::series_text(s));
                }
            }
        }
        Cmd::Stmatrices { lattice, group } => {
            let file = load(lattice)?;
            let spec = GroupSpec::parse(group)?;
            let md = stmatrices_command(&file, &spec)?;
            if json_out {
                let s: Vec<Vec<String>> = md
                    .s
                    .iter()
                    .map(|row| row.iter().map(|c| c.to_text()).collect())
                    .collect();
                let t: Vec<String> = md.t.iter().map(|c| c.to_text()).collect();
                println!(
                    "{}",
                    json!({"command": "stmatrices", "labels": md.labels, "s": s, "t": t})
                );
            } else {
                println!("labels {:?}", md.labels);
                for (i, row) in md.s.iter().enumerate() {
                    let cells: Vec<String> = row.iter().map(|c| c.to_text()).collect();
                    println!("S[{i}] = [{}]", cells.join("; "));
                }
                let ts: Vec<String> = md.t.iter().map(|c| c.to_text()).collect();
                println!("T = [{}]", ts.join("; "));
            }
        }
        Cmd::Bounds { primitive, trivial, file } => {
            let mut exps: Vec<Vec<Rat>> = Vec::new();
            if let Some(n) = primitive {
                for k in 1..*n {
                    if num::integer::gcd(k, *n) == 1 {
                        exps.push(vec![Rat::new(Int::from(k as i64), Int::from(*n as i64))]);
                    }
                }
            } else if let Some(d) = trivial {
                exps = vec![vec![Rat::from_integer(Int::from(0))]; *d];
            } else if let Some(path) = file {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::ParseError(format!("{}: {e}", path.display())))?;
                for line in text.lines() {
                    let line = line.trim();
                    if line.is_empty() {
                        continue;
                    }
                    let mut row = Vec::new();
                    for tok in line.split(',') {
                        let tok = tok.trim();
                        let v = if let Some((n, d)) = tok.split_once('/') {
                            Rat::new(
                                n.parse().map_err(|_| Error::ParseError(tok.into()))?,
                                d.parse().map_err(|_| Error::ParseError(tok.into()))?,
                            )
                        } else {
                            Rat::from_integer(tok.parse().map_err(|_| Error::ParseError(tok.into()))?)
                        };
                        row.push(v);
                    }
                    exps.push(row);
                }
            } else {
                return Err(Error::ParseError(
                    "bounds needs --primitive, --trivial or --file".into(),
                ));
            }
            let b = abelian_lower_bounds(&exps);
            if json_out {
                println!(
                    "{}",
                    json!({
                        "command": "bounds",
                        "dimension": exps.len(),
                        "level2": b.level2, "bound2": b.bound2, "attains2": b.attains2,
                        "level3": b.level3, "bound3": b.bound3, "attains3": b.attains3,
                    })
                );
            } else {
                println!(
                    "d = {}: level-2 invariants {} (bound {}), level-3 invariants {} (bound {})",
                    exps.len(),
                    b.level2,
                    b.bound2,
                    b.level3,
                    b.bound3
                );
                if b.attains2 {
                    println!("level-2 bound attained");
                }
            }
        }
    }
    Ok(0)
}

fn print_series(s: &QSeries, json_out: bool, cmd: &str) {
    if json_out {
        println!(
            "{}",
            json!({"command": cmd, "character": report::series_out(s), "summary": summary_line(s)})
        );
    } else {
        println!("{}", report::series_text(s));
    }
}

fn modules_command(
    file: &LatticeFile,
    spec: &GroupSpec,
    order: &Rat,
) -> Result<Vec<(String, QSeries)>> {
    let lat = &file.lattice;
    match spec {
        GroupSpec::Cyclic { g } => {
            let m = file
                .maps
                .get(g)
                .ok_or_else(|| Error::ValidationError(format!("unknown automorphism '{g}'")))?;
            let line = cyclic_line(lat, m, order)?;
            let n = line.n;
            let mut out = Vec::new();
            for i in 0..n as usize {
                for l in 0..n {
                    let mut sum = QSeries::zero(order.clone());
                    for (j, t) in line.rows[i].iter().enumerate() {
                        let phase = Cyclotomic::root_of_unity(n, -((l as i64) * (j as i64)));
                        sum = sum.add(&t.scale(&phase));
                    }
                    let sum = sum.scale_rat(&Rat::new(Int::from(1), Int::from(n as i64)));
                    out.push((format!("[{g}^{i},{l}]"), sum));
                }
            }
            Ok(out)
        }
        GroupSpec::Semidirect { q: 3, p: 2, phi: -1, a, big_a } => {
            // the S3 demo: anomalous but fully computable at character level
            let tm = file
                .maps
                .get(a)
                .ok_or_else(|| Error::ValidationError(format!("unknown automorphism '{a}'")))?;
            let sm = file
                .maps
                .get(big_a)
                .ok_or_else(|| Error::ValidationError(format!("unknown automorphism '{big_a}'")))?;
            let (s_lift, t_lift) = split_lift_semidirect(lat, sm, tm, -1, 3, 2)?;
            let id = Lift::identity(lat.rank);
            let t_ee = twining_character(lat, &id, &id, order)?;
            let t_es = twining_character(lat, &id, &s_lift, order)?;
            let t_et = twining_character(lat, &id, &t_lift, order)?;
            let sixth = |a: &QSeries, ca: i64, b: &QSeries, cb: i64, c: &QSeries, cc: i64| {
                a.scale_rat(&Rat::new(Int::from(ca), Int::from(6)))
                    .add(&b.scale_rat(&Rat::new(Int::from(cb), Int::from(6))))
                    .add(&c.scale_rat(&Rat::new(Int::from(cc), Int::from(6))))
            };
            let mut out = vec![
                ("[e,0]".to_string(), sixth(&t_ee, 1, &t_es, 3, &t_et, 2)),
                ("[e,sgn]".to_string(), sixth(&t_ee, 1, &t_es, -3, &t_et, 2)),
                ("[e,2]".to_string(), sixth(&t_ee, 2, &t_es, 0, &t_et, -2)),
            ];
            let r_s = sector_type(lat, sm)?;
            let sec_s = SectorActions::cyclic_sector(lat, &s_lift, 2, r_s, order)?;
            for (l, chi) in sec_s
                .module_characters(&cyclic_projective_characters(2, r_s), order)?
                .into_iter()
                .enumerate()
            {
                out.push((format!("[{big_a},{l}]"), chi));
            }
            let r_t = sector_type(lat, tm)?;
            let sec_t = SectorActions::cyclic_sector(lat, &t_lift, 3, r_t, order)?;
            for (l, chi) in sec_t
                .module_characters(&cyclic_projective_characters(3, r_t), order)?
                .into_iter()
                .enumerate()
            {
                out.push((format!("[{a},{l}]"), chi));
            }
            Ok(out)
        }
        _ => Err(Error::ValidationError(
            "modules supports cyclic groups and the s3 demo".into(),
        )),
    }
}

fn stmatrices_command(file: &LatticeFile, spec: &GroupSpec) -> Result<ModularData> {
    let lat = &file.lattice;
    let c = Rat::from_integer(Int::from(lat.rank as i64));
    match spec {
        GroupSpec::Cyclic { g } => {
            let m = file
                .maps
                .get(g)
                .ok_or_else(|| Error::ValidationError(format!("unknown automorphism '{g}'")))?;
            let r = sector_type(lat, m)?;
            if r != 0 {
                return Err(Error::AnomalousOrbifold(format!("type r = {r} != 0")));
            }
            let group = FiniteGroup::generate(&[(g.clone(), m.clone())], 512)?;
            let n = group.order() as u64;
            let reps: Vec<usize> = (0..group.order()).collect();
            let cents: Vec<Vec<usize>> = (0..group.order()).map(|_| (0..group.order()).collect()).collect();
            // order elements as powers of the generator for the tables
            let gidx = (0..group.order())
                .find(|&i| group.elems[i].matrix == m.matrix)
                .unwrap();
            let mut pow_of = vec![0usize; group.order()];
            let mut cur = 0usize;
            for k in 0..group.order() {
                pow_of[cur] = k;
                cur = group.mult[cur][gidx];
            }
            let tables: Vec<Vec<Vec<Cyclotomic>>> = (0..group.order())
                .map(|_| {
                    (0..n)
                        .map(|l| {
                            (0..group.order())
                                .map(|h| {
                                    Cyclotomic::root_of_unity(
                                        n,
                                        (l * pow_of[h] as u64) as i64,
                                    )
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect();
            st_matrices(&group, &reps, &cents, &tables, &c)
        }
        GroupSpec::Semidirect { q: 3, p: 2, phi: -1, a, big_a } => {
            let tm = file
                .maps
                .get(a)
                .ok_or_else(|| Error::ValidationError(format!("unknown automorphism '{a}'")))?;
            let sm = file
                .maps
                .get(big_a)
                .ok_or_else(|| Error::ValidationError(format!("unknown automorphism '{big_a}'")))?;
            let group = FiniteGroup::generate(
                &[(big_a.clone(), sm.clone()), (a.clone(), tm.clone())],
                24,
            )?;
            let classes = group.conjugacy_classes();
            let mut rep_e = 0;
            let mut rep_s = 0;
            let mut rep_t = 0;
            for cl in &classes {
                match group.element_order(cl[0]) {
                    1 => rep_e = cl[0],
                    2 => rep_s = cl[0],
                    3 => rep_t = cl[0],
                    _ => {}
                }
            }
            let cent_e: Vec<usize> = (0..group.order()).collect();
            let cent_s = group.centralizer(rep_s);
            let cent_t = group.centralizer(rep_t);
            let mut tab_e = vec![vec![Cyclotomic::one(); cent_e.len()]; 3];
            for (i, &gg) in cent_e.iter().enumerate() {
                let o = group.element_order(gg);
                tab_e[1][i] =
                    if o == 2 { Cyclotomic::from_i64(-1) } else { Cyclotomic::one() };
                tab_e[2][i] = match o {
                    1 => Cyclotomic::from_i64(2),
                    2 => Cyclotomic::from_i64(0),
                    _ => Cyclotomic::from_i64(-1),
                };
            }
            let r_s = sector_type(lat, sm)?;
            let r_t = sector_type(lat, tm)?;
            let proj_s = cyclic_projective_characters(2, r_s);
            let mut tab_s = vec![vec![Cyclotomic::one(); cent_s.len()]; 2];
            for (i, &gg) in cent_s.iter().enumerate() {
                let k = if gg == rep_s { 1 } else { 0 };
                for l in 0..2 {
                    tab_s[l][i] = proj_s[l][k].clone();
                }
            }
            let proj_t = cyclic_projective_characters(3, r_t);
            let mut tab_t = vec![vec![Cyclotomic::one(); cent_t.len()]; 3];
            for (i, &gg) in cent_t.iter().enumerate() {
                let mut k = 0;
                let mut cur = 0usize;
                for kk in 0..3 {
                    if cur == gg {
                        k = kk;
                        break;
                    }
                    cur = group.mult[cur][rep_t];
                }
                for l in 0..3 {
                    tab_t[l][i] = proj_t[l][k].clone();
                }
            }
            let a_idx = (0..group.order())
                .find(|&i| group.elems[i].matrix == tm.matrix)
                .unwrap();
            let big_a_idx = (0..group.order())
                .find(|&i| group.elems[i].matrix == sm.matrix)
                .unwrap();
            let coc = SemidirectCocycle::new(&group, a_idx, big_a_idx, 3, 2, -1, r_s, r_t)?;
            let cg = |g: usize, h1: usize, h2: usize| coc.descended(&group, g, h1, h2).unwrap();
            st_matrices_with_cocycle(
                &group,
                &[rep_e, rep_s, rep_t],
                &[cent_e, cent_s, cent_t],
                &[tab_e, tab_s, tab_t],
                &c,
                Some(&cg),
            )
        }
        _ => Err(Error::ValidationError(
            "stmatrices supports cyclic type-0 groups and the s3 demo".into(),
        )),
    }
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code_for(&e));
        }
    }
}
