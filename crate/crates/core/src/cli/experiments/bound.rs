use crate::bounds::{chaining_bound, theorem1_bound, theorem2_bound};
use crate::cli::config::BoundConfig;
use crate::cli::run::RunOutput;
use crate::cli::table::{Cell, Table};
use crate::error::Result;

pub fn run(c: &BoundConfig) -> Result<RunOutput> {
    let mut table = Table::new("bound", &["value", "theorem1", "theorem2", "chaining_c1"]);
    for &v in &c.values {
        let inputs = c.swept(v);
        let t2 = match inputs.coupling_m {
            Some(_) => Cell::Float(theorem2_bound(&inputs)?),
            None => Cell::Text(String::new()),
        };
        let ch = match (inputs.diameter, inputs.rho_n) {
            (Some(_), Some(_)) => Cell::Float(chaining_bound(&inputs)?.value),
            _ => Cell::Text(String::new()),
        };
        table.push(vec![v.into(), theorem1_bound(&inputs)?.into(), t2, ch]);
    }
    table.sort();
    let mut out = RunOutput::default();
    out.report.push(format!("sweep over {:?}", c.sweep));
    out.report.push(table.to_string());
    out.tables.push(table);
    Ok(out)
}
