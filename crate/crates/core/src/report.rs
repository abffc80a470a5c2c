//! JSON and CSV forms of bundle certificates.
//!
//! Rationals are always written as `"p/q"` strings and certified scalars as
//! `"mid +/- bound"` decimals.

use std::io::{Read, Write};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Sign;
use crate::search::{BundleCertificate, InequalityEntry};

/// Decimal digits printed for `x1`, `x2`.
pub const EXPORT_DIGITS: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityRecord {
    pub i: i64,
    pub lower_bound: Option<f64>,
    pub verdict: String,
}

/// Serialized certificate; field order is the output key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub k: i64,
    pub m: i64,
    pub n: i64,
    pub feasible: bool,
    pub certified: bool,
    pub x1: Option<String>,
    pub x2: Option<String>,
    pub inequalities: Vec<InequalityRecord>,
    pub ppt_ok: bool,
    #[serde(rename = "eP")]
    pub e_p: Option<i64>,
    pub chi_orbifold: String,
    #[serde(rename = "eM")]
    pub e_m: Option<i64>,
    pub chi_manifold: i64,
    pub genus: i64,
    pub ratio: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_euler: Option<i64>,
}

pub const CSV_COLUMNS: [&str; 16] = [
    "k",
    "m",
    "n",
    "feasible",
    "certified",
    "x1",
    "x2",
    "inequalities",
    "ppt_ok",
    "eP",
    "chi_orbifold",
    "eM",
    "chi_manifold",
    "genus",
    "ratio",
    "oracle_euler",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

pub fn format_ratio(r: &Ratio<i64>) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_ratio(s: &str) -> Result<Ratio<i64>> {
    let (p, q) = s
        .split_once('/')
        .ok_or_else(|| Error::Output(format!("rational {s:?} is not of the form p/q")))?;
    let p: i64 = p.trim().parse().map_err(|_| Error::Output(format!("bad numerator in {s:?}")))?;
    let q: i64 = q.trim().parse().map_err(|_| Error::Output(format!("bad denominator in {s:?}")))?;
    if q == 0 {
        return Err(Error::Output(format!("zero denominator in {s:?}")));
    }
    Ok(Ratio::new(p, q))
}

pub fn verdict_label(s: Sign) -> &'static str {
    match s {
        Sign::StrictlyPositive => "holds",
        Sign::StrictlyNegative | Sign::Zero => "fails",
        Sign::Undecided => "undecided",
    }
}

impl From<&InequalityEntry> for InequalityRecord {
    fn from(e: &InequalityEntry) -> Self {
        InequalityRecord {
            i: e.i,
            lower_bound: e.lower_bound,
            verdict: verdict_label(e.verdict).to_string(),
        }
    }
}

impl From<&BundleCertificate> for CertificateRecord {
    fn from(c: &BundleCertificate) -> Self {
        CertificateRecord {
            k: c.k,
            m: c.m,
            n: c.n,
            feasible: c.feasible,
            certified: c.certified,
            x1: c.x1.as_ref().map(|x| x.to_decimal_string(EXPORT_DIGITS)),
            x2: c.x2.as_ref().map(|x| x.to_decimal_string(EXPORT_DIGITS)),
            inequalities: c.inequalities.iter().map(InequalityRecord::from).collect(),
            ppt_ok: c.ppt_ok,
            e_p: c.e_p,
            chi_orbifold: format_ratio(&c.chi_orbifold),
            e_m: c.e_m,
            chi_manifold: c.chi_manifold,
            genus: c.genus,
            ratio: c.ratio.as_ref().map(format_ratio),
            oracle_euler: c.oracle_euler,
        }
    }
}

impl CertificateRecord {
    pub fn ratio(&self) -> Result<Option<Ratio<i64>>> {
        self.ratio.as_deref().map(parse_ratio).transpose()
    }

    pub fn chi_orbifold(&self) -> Result<Ratio<i64>> {
        parse_ratio(&self.chi_orbifold)
    }

    fn csv_row(&self) -> Vec<String> {
        let opt = |v: Option<i64>| v.map(|x| x.to_string()).unwrap_or_default();
        let ineq = self
            .inequalities
            .iter()
            .map(|e| {
                let lb = e.lower_bound.map(|b| format!("{b:e}")).unwrap_or_default();
                format!("{}:{}:{}", e.i, e.verdict, lb)
            })
            .collect::<Vec<_>>()
            .join(";");
        vec![
            self.k.to_string(),
            self.m.to_string(),
            self.n.to_string(),
            self.feasible.to_string(),
            self.certified.to_string(),
            self.x1.clone().unwrap_or_default(),
            self.x2.clone().unwrap_or_default(),
            ineq,
            self.ppt_ok.to_string(),
            opt(self.e_p),
            self.chi_orbifold.clone(),
            opt(self.e_m),
            self.chi_manifold.to_string(),
            self.genus.to_string(),
            self.ratio.clone().unwrap_or_default(),
            opt(self.oracle_euler),
        ]
    }

    fn from_csv_row(row: &csv::StringRecord) -> Result<Self> {
        if row.len() != CSV_COLUMNS.len() {
            return Err(Error::Output(format!("expected {} columns, got {}", CSV_COLUMNS.len(), row.len())));
        }
        let bad = |col: &str| Error::Output(format!("bad value in column {col}"));
        let int = |i: usize| -> Result<i64> { row[i].parse().map_err(|_| bad(CSV_COLUMNS[i])) };
        let opt_int = |i: usize| -> Result<Option<i64>> {
            if row[i].is_empty() {
                Ok(None)
            } else {
                int(i).map(Some)
            }
        };
        let boolean = |i: usize| -> Result<bool> { row[i].parse().map_err(|_| bad(CSV_COLUMNS[i])) };
        let opt_str = |i: usize| (!row[i].is_empty()).then(|| row[i].to_string());
        let inequalities = if row[7].is_empty() {
            Vec::new()
        } else {
            row[7]
                .split(';')
                .map(|item| {
                    let mut parts = item.splitn(3, ':');
                    let i = parts.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("inequalities"))?;
                    let verdict = parts.next().ok_or_else(|| bad("inequalities"))?.to_string();
                    let lb = parts.next().unwrap_or("");
                    let lower_bound = if lb.is_empty() {
                        None
                    } else {
                        Some(lb.parse().map_err(|_| bad("inequalities"))?)
                    };
                    Ok(InequalityRecord { i, lower_bound, verdict })
                })
                .collect::<Result<_>>()?
        };
        Ok(CertificateRecord {
            k: int(0)?,
            m: int(1)?,
            n: int(2)?,
            feasible: boolean(3)?,
            certified: boolean(4)?,
            x1: opt_str(5),
            x2: opt_str(6),
            inequalities,
            ppt_ok: boolean(8)?,
            e_p: opt_int(9)?,
            chi_orbifold: row[10].to_string(),
            e_m: opt_int(11)?,
            chi_manifold: int(12)?,
            genus: int(13)?,
            ratio: opt_str(14),
            oracle_euler: opt_int(15)?,
        })
    }
}

fn out_err(e: impl std::fmt::Display) -> Error {
    Error::Output(e.to_string())
}

/// One certificate as a JSON object, or a header plus one CSV row.
pub fn write_certificate<W: Write>(cert: &BundleCertificate, format: Format, out: W) -> Result<()> {
    write_records(&[CertificateRecord::from(cert)], format, false, out)
}

/// Certificates as a JSON array, or CSV with one row per triple.
pub fn write_certificates<W: Write>(certs: &[BundleCertificate], format: Format, out: W) -> Result<()> {
    let records: Vec<_> = certs.iter().map(CertificateRecord::from).collect();
    write_records(&records, format, true, out)
}

fn write_records<W: Write>(records: &[CertificateRecord], format: Format, as_list: bool, mut out: W) -> Result<()> {
    match format {
        Format::Json => {
            if as_list {
                serde_json::to_writer_pretty(&mut out, records).map_err(out_err)?;
            } else {
                serde_json::to_writer_pretty(&mut out, &records[0]).map_err(out_err)?;
            }
            writeln!(out).map_err(out_err)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(CSV_COLUMNS).map_err(out_err)?;
            for r in records {
                w.write_record(r.csv_row()).map_err(out_err)?;
            }
            w.flush().map_err(out_err)?;
        }
    }
    Ok(())
}

/// Parses either a single JSON object, a JSON array, or CSV.
pub fn read_records<R: Read>(format: Format, input: R) -> Result<Vec<CertificateRecord>> {
    match format {
        Format::Json => {
            let v: serde_json::Value = serde_json::from_reader(input).map_err(out_err)?;
            if v.is_array() {
                serde_json::from_value(v).map_err(out_err)
            } else {
                Ok(vec![serde_json::from_value(v).map_err(out_err)?])
            }
        }
        Format::Csv => {
            let mut r = csv::Reader::from_reader(input);
            let header = r.headers().map_err(out_err)?.clone();
            if header.iter().ne(CSV_COLUMNS) {
                return Err(Error::Output("unexpected CSV header".into()));
            }
            r.records()
                .map(|row| CertificateRecord::from_csv_row(&row.map_err(out_err)?))
                .collect()
        }
    }
}
