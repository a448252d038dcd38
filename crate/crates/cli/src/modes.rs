use serde::Serialize;
use symtypes::avqs::{self, AvqsReport, AvqsSpec};
use symtypes::hypotest::{self, EpsilonChoice, ExponentReport, NullSet, TestSpec};
use symtypes::quantum::{self, Basis};
use symtypes::schur_weyl;
use symtypes::tableaux::{self, Frequency, YoungFrame};

use crate::config::{bloch, diag, Config};
use crate::{join, json, CliError, Format, Table};

/// Largest `n` the tableaux listing accepts.
pub const MAX_TABLEAUX_N: usize = 24;

fn guard_dims(d: usize, ns: &[usize]) -> Result<(), CliError> {
    for &n in ns {
        symtypes::tensor_dim(d, n)?;
    }
    Ok(())
}

pub fn sanov(cfg: &Config) -> Result<Table<ExponentReport>, CliError> {
    let sigma = cfg.sigma_or(diag(&[0.5, 0.5]))?;
    let null = cfg.null_states_or(vec![diag(&[0.7, 0.3])])?;
    let mut all: Vec<_> = null.iter().collect();
    all.push(&sigma);
    let d = cfg.check_dims(&all)?;
    let ns = cfg.ns(4, 10)?;
    guard_dims(d, &ns)?;
    let choice = if cfg.schedule.unwrap_or(false) {
        EpsilonChoice::Schedule {
            nu: cfg.nu.unwrap_or(0.1),
        }
    } else {
        EpsilonChoice::Fixed(cfg.epsilon.unwrap_or(0.25))
    };
    let eps0 = match choice {
        EpsilonChoice::Fixed(e) => e,
        EpsilonChoice::Schedule { nu } => hypotest::eps_schedule(ns[0], nu, d, 0.0),
    };
    let set = if cfg.hull.unwrap_or(false) {
        NullSet::Hull(null)
    } else {
        NullSet::Points(null)
    };
    let spec = TestSpec::new(sigma, set, eps0, ns[0])?;
    let rows = hypotest::run_sanov(&spec, &ns, choice)?;
    Ok(Table {
        header: ExponentReport::CSV_HEADER,
        rows,
        csv_row: ExponentReport::csv_row,
    })
}

pub fn avqs(cfg: &Config) -> Result<Table<AvqsReport>, CliError> {
    let sigma = cfg.sigma_or(diag(&[0.75, 0.25]))?;
    let gens = cfg.null_states_or(vec![diag(&[0.8, 0.2]), bloch(0.3, 0.0, 0.0)])?;
    let mut all: Vec<_> = gens.iter().collect();
    all.push(&sigma);
    let d = cfg.check_dims(&all)?;
    let ns = cfg.ns(2, 6)?;
    guard_dims(d, &ns)?;
    let mut spec = AvqsSpec::new(gens, sigma, cfg.epsilon.unwrap_or(0.3), ns[0]);
    spec.delta = cfg.delta.unwrap_or(0.0);
    spec.nu = cfg.nu.unwrap_or(0.1);
    let rows = avqs::run_avqs(&spec, &ns)?;
    Ok(Table {
        header: AvqsReport::CSV_HEADER,
        rows,
        csv_row: AvqsReport::csv_row,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct NpRow {
    pub n: usize,
    pub nu: f64,
    pub beta: f64,
    pub exponent: f64,
    #[serde(rename = "reference_D")]
    pub reference_d: f64,
}

impl NpRow {
    pub const CSV_HEADER: &'static str = "n,nu,beta,exponent,reference_D";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.n, self.nu, self.beta, self.exponent, self.reference_d
        )
    }
}

/// Optimal type-II error at type-I level `ν` for the first null-set state.
pub fn np(cfg: &Config) -> Result<Table<NpRow>, CliError> {
    let sigma = cfg.sigma_or(diag(&[0.5, 0.5]))?;
    let null = cfg.null_states_or(vec![diag(&[0.7, 0.3])])?;
    let rho = null
        .first()
        .ok_or_else(|| CliError::Parse("null_set is empty".into()))?;
    cfg.check_dims(&[rho, &sigma])?;
    let ns = cfg.ns(4, 10)?;
    guard_dims(rho.dim(), &ns)?;
    let nu = cfg.nu.unwrap_or(0.1);
    let reference_d = quantum::qrel_entropy(rho, &sigma);
    let rows = ns
        .iter()
        .map(|&n| {
            let beta = hypotest::neyman_pearson(rho, &sigma, n, nu)?;
            Ok(NpRow {
                n,
                nu,
                beta,
                exponent: -beta.log2() / n as f64,
                reference_d,
            })
        })
        .collect::<Result<_, CliError>>()?;
    Ok(Table {
        header: NpRow::CSV_HEADER,
        rows,
        csv_row: NpRow::csv_row,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TableauxRow {
    pub f: Vec<usize>,
    pub lambda: Vec<usize>,
    pub kostka: u64,
    pub dim: u128,
    pub type_class_size: u128,
}

impl TableauxRow {
    pub const CSV_HEADER: &'static str = "f,lambda,kostka,dim,type_class_size";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            join(&self.f),
            join(&self.lambda),
            self.kostka,
            self.dim,
            self.type_class_size
        )
    }
}

pub fn tableaux(cfg: &Config) -> Result<Table<TableauxRow>, CliError> {
    let d = cfg.d.unwrap_or(2);
    let n = cfg.n.or(cfg.n_range.map(|r| r[1])).unwrap_or(4);
    if d == 0 || n == 0 {
        return Err(CliError::Parse("d and n must be positive".into()));
    }
    if n > MAX_TABLEAUX_N {
        return Err(CliError::Guard(symtypes::Error::Guard {
            what: "tableaux listing n",
            needed: n as u128,
            limit: MAX_TABLEAUX_N as u128,
        }));
    }
    let frames = tableaux::enumerate_frames(d, n);
    let mut rows = Vec::new();
    for f in tableaux::enumerate_frequencies(d, n) {
        for l in &frames {
            rows.push(TableauxRow {
                f: f.counts().to_vec(),
                lambda: l.parts().to_vec(),
                kostka: tableaux::kostka(&f, l),
                dim: tableaux::hook_dimension(l),
                type_class_size: tableaux::type_class_size(&f),
            });
        }
    }
    Ok(Table {
        header: TableauxRow::CSV_HEADER,
        rows,
        csv_row: TableauxRow::csv_row,
    })
}

/// Dumps `P_{f,λ}` in the standard frame. The product basis is the
/// eigenbasis of `sigma` when given, the computational basis otherwise.
pub fn project(cfg: &Config, format: Format) -> Result<String, CliError> {
    let counts = cfg
        .f
        .clone()
        .ok_or_else(|| CliError::Parse("project needs \"f\"".into()))?;
    let parts = cfg
        .lambda
        .clone()
        .ok_or_else(|| CliError::Parse("project needs \"lambda\"".into()))?;
    let d = counts.len();
    if cfg.d.is_some_and(|x| x != d) {
        return Err(CliError::Parse(format!(
            "f has {d} entries but d = {}",
            cfg.d.unwrap_or(0)
        )));
    }
    let f = Frequency::new(counts)?;
    let lambda = YoungFrame::new(parts, d)?;
    symtypes::tensor_dim(d, f.n())?;
    let basis = match &cfg.sigma {
        Some(s) => {
            let sigma = s.to_state()?;
            cfg.check_dims(&[&sigma])?;
            Basis::eigenbasis(&sigma).0
        }
        None => Basis::computational(d),
    };
    let dump = schur_weyl::block_projector(&f, &lambda, &basis)?.dump()?;
    match format {
        Format::Json => json(&dump),
        Format::Csv => {
            let dim = symtypes::tensor_dim(d, f.n())?;
            let mut out = String::from("row,col,re,im\n");
            for (k, [re, im]) in dump.matrix.iter().enumerate() {
                out.push_str(&format!("{},{},{},{}\n", k / dim, k % dim, re, im));
            }
            Ok(out)
        }
    }
}
