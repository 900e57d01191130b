use serde_json::{json, Value};
use upcong_core::arith::Rat;
use upcong_core::fixtures::{restriction_set, table1};
use upcong_core::jacobi::{JacobiExpansion, JacobiIndex, JacobiModP};
use upcong_core::linalg::exact::solve_in_span;
use upcong_core::modp::{
    cycle_precision, heat_cycle, jacobi_criterion, required_precision, up_congruence_space, verdict_consistent, verify_criterion, Verdict,
};
use upcong_core::restriction::{extend_precision, is_valid_s, jacobi_basis, solve_basis};
use upcong_siegel::criterion::siegel_criterion;
use upcong_siegel::lattice::lattice_theta;
use upcong_siegel::schottky::schottky_check;
use upcong_siegel::TwiceT;

use crate::error::{CliError, CliResult};
use crate::input::{parse_form, parse_gram, parse_index};
use crate::report::{join_matrix, join_vec, JobConfig, Report};

const FORM_HEADER: [&str; 4] = ["form", "n", "r", "c"];

fn jacobi_rows(name: &str, phi: &JacobiExpansion) -> Vec<Vec<String>> {
    phi.iter().map(|((n, r), c)| vec![name.to_string(), n.to_string(), join_vec(r), c.to_string()]).collect()
}

fn modp_json(f: &JacobiModP) -> Value {
    let coeffs: Vec<Value> = f.iter().map(|((n, r), c)| json!({"n": n, "r": r, "c": c})).collect();
    json!({
        "kind": "jacobi_mod_p",
        "p": f.p,
        "weight": f.weight,
        "twice_index": f.index.twice_rows(),
        "precision": f.precision,
        "coeffs": coeffs,
    })
}

pub fn basis(k: i64, index: &str, precision: Option<usize>) -> CliResult<Report> {
    let idx = parse_index(index)?;
    let mut config = JobConfig::new("basis");
    config.weight = Some(k);
    config.twice_index = Some(idx.twice_rows());
    let prec = config.settle_precision(precision, required_precision(&idx, k, k)?);
    let b = jacobi_basis(k, &idx, prec)?;
    let forms = b.expansions();
    let agree = forms.iter().all(|f| f.verify_periodicity() && f.is_integral());
    let mut rows = vec![];
    for (i, f) in forms.iter().enumerate() {
        rows.extend(jacobi_rows(&format!("basis[{i}]"), f));
    }
    Ok(Report {
        config,
        summary: json!({"weight": k, "twice_index": idx.twice_rows(), "dimension": b.dim(), "S": b.s_set, "precision": prec}),
        result: json!({"forms": forms.iter().map(JacobiExpansion::to_json).collect::<Vec<_>>()}),
        agree,
        header: FORM_HEADER.to_vec(),
        rows,
    })
}

pub fn up_space(k: i64, index: &str, p: u64) -> CliResult<Report> {
    let idx = parse_index(index)?;
    let mut config = JobConfig::new("up-space");
    config.weight = Some(k);
    config.twice_index = Some(idx.twice_rows());
    config.primes = vec![p];
    let space = up_congruence_space(k, &idx, p)?;
    config.precision = Some(space.basis.precision());
    let forms = space.forms();
    let agree = forms.iter().all(|f| f.u_p().is_zero());
    let mut rows = vec![];
    for (i, f) in forms.iter().enumerate() {
        rows.extend(f.iter().map(|((n, r), c)| vec![format!("kernel[{i}]"), n.to_string(), join_vec(r), c.to_string()]));
    }
    Ok(Report {
        config,
        summary: json!({"dimension": space.dim(), "basis_dimension": space.basis.dim(), "precision": space.basis.precision()}),
        result: json!({"kernel": space.kernel, "forms": forms.iter().map(modp_json).collect::<Vec<_>>()}),
        agree,
        header: FORM_HEADER.to_vec(),
        rows,
    })
}

pub fn heat(form: &str, p: u64, precision: Option<usize>) -> CliResult<Report> {
    let phi = parse_form(form)?;
    let k = phi.weight.ok_or_else(|| CliError::Input("the form needs a weight".into()))?;
    let mut config = JobConfig::new("heat-cycle");
    config.weight = Some(k);
    config.twice_index = Some(phi.index.twice_rows());
    config.form = Some(form.to_string());
    config.primes = vec![p];
    let prec = config.settle_precision(precision, cycle_precision(&phi.index, k, p)?);
    let r = heat_cycle(&extend_precision(&phi, prec)?.reduce_mod(p)?)?;
    let falls_at_low_points = r.falls.iter().all(|f| r.low_points.contains(&f.step));
    let balanced = r.balanced();
    let agree = falls_at_low_points && (!r.cycle_closed || balanced);
    let rows = r
        .filtrations
        .iter()
        .enumerate()
        .map(|(e, w)| {
            let fall = r.falls.iter().find(|f| f.step == e);
            vec![
                e.to_string(),
                w.map(|w| w.to_string()).unwrap_or_default(),
                r.low_points.contains(&e).to_string(),
                fall.map(|f| f.gap.to_string()).unwrap_or_default(),
                fall.map(|f| f.drop.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    Ok(Report {
        config,
        summary: json!({"filtrations": r.filtrations, "cycle_closed": r.cycle_closed, "balanced": balanced}),
        result: serde_json::to_value(&r).expect("report serializes"),
        agree,
        header: vec!["step", "filtration", "low_point", "fall_gap", "fall_drop"],
        rows,
    })
}

pub fn restrict(form: &str, s: &[i64]) -> CliResult<Report> {
    let phi = parse_form(form)?;
    let mut config = JobConfig::new("restrict");
    config.weight = phi.weight;
    config.twice_index = Some(phi.index.twice_rows());
    config.form = Some(form.to_string());
    config.s = Some(s.to_vec());
    if s.len() != phi.index.rank() {
        return Err(CliError::Input(format!("s has length {}, the index has rank {}", s.len(), phi.index.rank())));
    }
    let out = phi.restrict(s)?;
    Ok(Report {
        config,
        summary: json!({"scalar_index": out.index.scalar_value(), "precision": out.precision, "terms": out.iter().count()}),
        result: out.to_json(),
        agree: out.verify_periodicity(),
        header: FORM_HEADER.to_vec(),
        rows: jacobi_rows("restriction", &out),
    })
}

fn verdict_cells(v: &Verdict) -> [String; 4] {
    let (e, a, b) = match v {
        Verdict::FiltrationTest { exponent, not_congruent, congruent } => (exponent.to_string(), not_congruent.to_string(), congruent.to_string()),
        _ => Default::default(),
    };
    [v.name().to_string(), e, a, b]
}

pub fn criterion_jacobi(k: i64, rank: Option<usize>, index: Option<&str>, primes: &[u64], verify: bool) -> CliResult<Report> {
    let idx = match (index, rank) {
        (Some(i), _) => parse_index(i)?,
        (None, Some(l)) if l >= 1 => JacobiIndex::identity(l),
        _ => return Err(CliError::Input("give -l or --index".into())),
    };
    if rank.is_some_and(|l| l != idx.rank()) {
        return Err(CliError::Input(format!("-l {} disagrees with the index rank {}", rank.unwrap(), idx.rank())));
    }
    let l = idx.rank();
    let mut config = JobConfig::new("criterion-jacobi");
    config.weight = Some(k);
    config.rank = Some(l);
    config.twice_index = Some(idx.twice_rows());
    config.primes = primes.to_vec();
    config.verify = verify;
    let mut agree = true;
    let mut verdicts = vec![];
    let mut rows = vec![];
    for &p in primes {
        let v = jacobi_criterion(k, l, p, idx.det_twice());
        let consistent = verdict_consistent(&v, k, p);
        let checked = match &v {
            Verdict::ExcludedByBound | Verdict::FiltrationTest { .. } if verify => Some(verify_criterion(k, &idx, p)?),
            _ => None,
        };
        let verified = checked.as_ref().map(|c| c.pass());
        agree &= consistent && verified != Some(false);
        let [name, e, a, b] = verdict_cells(&v);
        rows.push(vec![
            "jacobi".into(),
            k.to_string(),
            l.to_string(),
            p.to_string(),
            name,
            e,
            a,
            b,
            consistent.to_string(),
            verified.map(|x| x.to_string()).unwrap_or_default(),
        ]);
        verdicts.push(json!({"p": p, "verdict": v, "consistent": consistent, "verification": checked}));
    }
    Ok(Report {
        config,
        summary: json!({"regimes": verdicts.iter().map(|v| v["verdict"]["regime"].clone()).collect::<Vec<_>>()}),
        result: json!({"verdicts": verdicts}),
        agree,
        header: CRITERION_HEADER.to_vec(),
        rows,
    })
}

const CRITERION_HEADER: [&str; 10] = ["family", "k", "rank", "p", "regime", "exponent", "not_congruent", "congruent", "consistent", "verified"];

pub fn criterion_siegel(k: i64, g: usize, primes: &[u64]) -> CliResult<Report> {
    let mut config = JobConfig::new("criterion-siegel");
    config.weight = Some(k);
    config.degree = Some(g);
    config.primes = primes.to_vec();
    let mut agree = true;
    let mut verdicts = vec![];
    let mut rows = vec![];
    for &p in primes {
        let v = siegel_criterion(k, g, p);
        let consistent = verdict_consistent(&v, k, p);
        agree &= consistent;
        let [name, e, a, b] = verdict_cells(&v);
        rows.push(vec!["siegel".into(), k.to_string(), g.to_string(), p.to_string(), name, e, a, b, consistent.to_string(), String::new()]);
        verdicts.push(json!({"p": p, "verdict": v, "consistent": consistent}));
    }
    Ok(Report {
        config,
        summary: json!({"regimes": verdicts.iter().map(|v| v["verdict"]["regime"].clone()).collect::<Vec<_>>()}),
        result: json!({"verdicts": verdicts}),
        agree,
        header: CRITERION_HEADER.to_vec(),
        rows,
    })
}

pub fn theta(gram: &str, g: usize, trace_bound: i64, budget: u64) -> CliResult<Report> {
    let lattice = parse_gram(gram)?;
    let mut config = JobConfig::new("lattice-theta");
    config.gram = Some(lattice.rows().to_vec());
    config.degree = Some(g);
    config.trace_bound = Some(trace_bound);
    config.budget = Some(budget);
    let th = lattice_theta(&lattice, g, trace_bound, budget)?;
    // the empty tuple is the only one of norm zero
    let agree = th.coeff(&TwiceT::zero(g)) == Rat::from_integer(1.into());
    let rows = th.iter().map(|(t, c)| vec![join_matrix(t.rows()), c.to_string()]).collect();
    Ok(Report {
        config,
        summary: json!({"rank": lattice.rank(), "det": lattice.det().to_string(), "weight": th.weight, "terms": th.len()}),
        result: th.to_json(),
        agree,
        header: vec!["twice_T", "c"],
        rows,
    })
}

pub fn check_table1() -> CliResult<Report> {
    let t = table1()?;
    let (idx, s) = restriction_set()?;
    let mut config = JobConfig::new("check-table1");
    config.twice_index = Some(t.index.twice_rows());
    config.precision = Some(t.precision);
    let mut agree = idx == t.index;
    let mut weights = vec![];
    let mut rows = vec![];
    for k in t.weights() {
        let valid = is_valid_s(&idx, t.precision, k, &s)?;
        let b = solve_basis(k, &idx, &s, t.precision)?;
        let chosen = jacobi_basis(k, &idx, t.precision)?;
        let forms = t.forms_of_weight(k);
        let cols: Vec<Vec<Rat>> = forms.iter().map(|f| f.expansion.orbit_values(&b.space)).collect();
        // computed lattice inside the integral span of the table
        let spans = b.expansions().iter().all(|e| {
            solve_in_span(&cols, &e.orbit_values(&b.space)).is_some_and(|y| y.iter().all(|c| c.is_integer()))
        });
        let same_dim = b.dim() == forms.len() && chosen.rows == b.rows;
        let mut ok = valid && spans && same_dim;
        for f in &forms {
            let x = b.membership(&f.expansion)?;
            let in_span = x.is_some();
            let integral = x.is_some_and(|x| x.iter().all(|c| c.is_integer()));
            let periodic = f.expansion.verify_periodicity();
            ok &= in_span && integral && periodic;
            rows.push(vec![
                k.to_string(),
                f.name.clone(),
                b.dim().to_string(),
                periodic.to_string(),
                in_span.to_string(),
                integral.to_string(),
                spans.to_string(),
            ]);
        }
        agree &= ok;
        weights.push(json!({
            "weight": k,
            "table_forms": forms.len(),
            "computed_dimension": b.dim(),
            "restriction_set_valid": valid,
            "default_restriction_set_agrees": chosen.rows == b.rows,
            "table_spans_computed": spans,
            "pass": ok,
        }));
    }
    Ok(Report {
        config,
        summary: json!({"table_version": t.version, "forms": t.forms.len(), "weights": t.weights()}),
        result: json!({"weights": weights}),
        agree,
        header: vec!["weight", "form", "computed_dim", "periodic", "in_span", "integral", "table_spans_computed"],
        rows,
    })
}

pub fn schottky(p: u64) -> CliResult<Report> {
    let mut config = JobConfig::new("schottky");
    config.primes = vec![p];
    config.degree = Some(4);
    let r = schottky_check(p)?;
    let rows = r
        .classes
        .iter()
        .map(|c| {
            vec![join_matrix(&c.twice_t), c.det_twice_t.to_string(), c.e8_e8.to_string(), c.d16_plus.to_string(), c.difference.to_string()]
        })
        .collect();
    Ok(Report {
        config,
        summary: json!({"value": r.value, "expected": r.expected, "content": r.content, "nonzero_mod_p": r.nonzero_mod_p}),
        agree: r.pass(),
        result: serde_json::to_value(&r).expect("report serializes"),
        header: vec!["twice_T", "det_twice_T", "e8_e8", "d16_plus", "difference"],
        rows,
    })
}
