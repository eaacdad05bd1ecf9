#![allow(dead_code, clippy::needless_range_loop)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use citykpi_core::rng::SplitMix64;

pub const KPI_COLUMNS: [&str; 8] = [
    "UNEMPLOYMENT_RATE",
    "National_Unemployment_Rate",
    "Impaired Driving Incidents",
    "90_RIGHT_ENERGY",
    "Edmonton CMA - Working Age Population Growth",
    "Edmonton CMA - Labour Force Growth",
    "Edmonton CMA - Employment Growth",
    "governance",
];

pub const KPI_ROWS: usize = 1158;
pub const KPI_COMPLETE_ROWS: usize = 43;
pub const KPI_NULLS: [usize; 8] = [1005, 1005, 1115, 771, 1060, 1060, 1060, 0];

const HEAD: [[f64; 8]; 5] = [
    [7.1, 8.4, 454.0, 895.67, 1.8, 1.3, -1.6, 1.0],
    [7.2, 8.4, 517.0, 875.08, 1.7, 0.4, -1.9, 0.0],
    [7.5, 8.3, 468.0, 1077.25, 1.6, -0.7, -3.1, 0.0],
    [7.7, 8.3, 632.0, 824.25, 1.6, -0.4, -2.9, 0.0],
    [7.4, 8.2, 464.0, 1197.25, 1.5, -0.2, -0.7, 1.0],
];

/// A synthetic city KPI table:
/// 1158 rows, sparse KPI columns, 43 complete rows led by the five known head rows.
pub fn kpi_table_csv() -> String {
    let mut rng = SplitMix64::new(2020);
    let mut noise = |scale: f64| (rng.next_f64() - 0.5) * 2.0 * scale;
    let non_null: Vec<usize> = KPI_NULLS.iter().map(|n| KPI_ROWS - n).collect();

    let mut out = String::new();
    let header: Vec<String> = KPI_COLUMNS.iter().map(|c| format!("\"{c}\"")).collect();
    writeln!(out, "{}", header.join(",")).unwrap();
    for i in 0..KPI_ROWS {
        let row: [f64; 8] = if i < HEAD.len() {
            HEAD[i]
        } else {
            let unemployment = 7.0 + noise(1.5);
            let growth = noise(3.0);
            let governance = f64::from(u8::from(growth - (unemployment - 7.0) + noise(1.0) > 0.0));
            [
                unemployment,
                unemployment + 0.8 + noise(0.3),
                500.0 + noise(120.0),
                1000.0 + noise(250.0),
                1.6 + noise(0.4),
                growth * 0.5,
                growth,
                governance,
            ]
        };
        let cells: Vec<String> =
            row.iter().enumerate().map(|(j, v)| if i < non_null[j] { format!("{v}") } else { String::new() }).collect();
        writeln!(out, "{}", cells.join(",")).unwrap();
    }
    out
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_citykpi")
}

pub fn citykpi(args: &[&str]) -> Output {
    Command::new(bin()).args(args).env_remove("CITYKPI_SEED").output().expect("spawn citykpi")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

/// Ingests the synthetic KPI table and returns the dataset JSON path.
pub fn kpi_dataset(dir: &Path) -> PathBuf {
    let csv = write(dir, "kpi.csv", &kpi_table_csv());
    let out = dir.join("kpi.json");
    let o = citykpi(&["ingest", "--input", csv.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}
