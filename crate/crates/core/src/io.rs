//! Sequence text files, labeled yearly series, the bundled boat-race data
//! and JSON run reports.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::sequence::BinarySequence;

/// Parses `0`, `1` and `-` characters. Whitespace is ignored and `#` starts
/// a comment running to the end of the line.
pub fn parse_sequence_text(text: &str) -> Result<BinarySequence> {
    let mut slots = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        for (col, c) in line.chars().enumerate() {
            match c {
                '#' => break,
                '0' => slots.push(Some(0)),
                '1' => slots.push(Some(1)),
                '-' => slots.push(None),
                c if c.is_whitespace() => {}
                other => {
                    return Err(Error::Parse {
                        line: ln + 1,
                        column: col + 1,
                        message: format!("unexpected character {other:?}"),
                    })
                }
            }
        }
    }
    let seq = BinarySequence::from_slots(slots)?;
    if seq.observed() == 0 {
        return Err(Error::Dataset("no observations".into()));
    }
    Ok(seq)
}

pub fn sequence_to_text(seq: &BinarySequence) -> String {
    let mut s = seq.to_letter_string();
    s.push('\n');
    s
}

pub fn read_sequence_file(path: &Path) -> Result<BinarySequence> {
    parse_sequence_text(&std::fs::read_to_string(path)?)
}

/// A row to drop: the `occurrence`-th row (1-based) listed for `year`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub year: i64,
    #[serde(default = "first")]
    pub occurrence: usize,
}

fn first() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedTotals {
    pub usable: usize,
    pub zeros: usize,
    pub ones: usize,
}

/// How to turn a `year,winner` CSV into letters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesConfig {
    pub label0: String,
    pub label1: String,
    #[serde(default)]
    pub exclude: Vec<Exclusion>,
    /// Totals the loaded series must reproduce, if set.
    #[serde(default)]
    pub expected: Option<ExpectedTotals>,
}

impl SeriesConfig {
    pub fn new(label0: &str, label1: &str) -> Self {
        SeriesConfig {
            label0: label0.into(),
            label1: label1.into(),
            exclude: Vec::new(),
            expected: None,
        }
    }

    /// Oxford wins are 0 and Cambridge wins 1. The 1877 dead heat and the
    /// second of the two 1849 races are dropped.
    pub fn boat_race() -> Self {
        SeriesConfig {
            label0: "Oxford".into(),
            label1: "Cambridge".into(),
            exclude: vec![
                Exclusion {
                    year: 1849,
                    occurrence: 2,
                },
                Exclusion {
                    year: 1877,
                    occurrence: 1,
                },
            ],
            expected: Some(ExpectedTotals {
                usable: 164,
                zeros: 79,
                ones: 85,
            }),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }
}

/// A yearly series; slot `t` holds the result for `first_year + t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSeries {
    pub first_year: i64,
    pub sequence: BinarySequence,
}

impl LabeledSeries {
    pub fn last_year(&self) -> i64 {
        self.first_year + self.sequence.len() as i64 - 1
    }

    fn check_totals(&self, expected: &ExpectedTotals) -> Result<()> {
        let (zeros, ones) = self.sequence.letter_totals();
        let got = ExpectedTotals {
            usable: zeros + ones,
            zeros,
            ones,
        };
        if got != *expected {
            return Err(Error::Dataset(format!(
                "expected {}/{}/{} usable/zero/one results, found {}/{}/{}",
                expected.usable, expected.zeros, expected.ones, got.usable, got.zeros, got.ones
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
struct Row {
    year: i64,
    winner: String,
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Parse {
        line,
        column: 0,
        message: e.to_string(),
    }
}

/// Parses `year,winner` CSV text. Blank winners and skipped years become
/// missing slots.
pub fn parse_labeled_series(text: &str, config: &SeriesConfig) -> Result<LabeledSeries> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(csv_error)?.clone();
    if headers.iter().collect::<Vec<_>>() != ["year", "winner"] {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: format!("expected header `year,winner`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut kept: Vec<(i64, Option<u8>)> = Vec::new();
    let mut prev_raw: Option<i64> = None;
    let mut occurrence = 0usize;
    for rec in reader.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let row: Row = rec.deserialize(Some(&headers)).map_err(csv_error)?;
        match prev_raw {
            Some(p) if row.year < p => {
                return Err(Error::Parse {
                    line,
                    column: 1,
                    message: format!("year {} follows {p}", row.year),
                })
            }
            Some(p) if row.year == p => occurrence += 1,
            _ => occurrence = 1,
        }
        prev_raw = Some(row.year);
        if config
            .exclude
            .iter()
            .any(|e| e.year == row.year && e.occurrence == occurrence)
        {
            continue;
        }
        if let Some(&(last, _)) = kept.last() {
            if row.year <= last {
                return Err(Error::Parse {
                    line,
                    column: 1,
                    message: format!("year {} repeated after exclusions", row.year),
                });
            }
        }
        let letter = match row.winner.as_str() {
            "" => None,
            w if w == config.label0 => Some(0),
            w if w == config.label1 => Some(1),
            other => {
                return Err(Error::Parse {
                    line,
                    column: 2,
                    message: format!("unknown label {other:?}"),
                })
            }
        };
        kept.push((row.year, letter));
    }
    let Some(&(first_year, _)) = kept.first() else {
        return Err(Error::Dataset("no rows".into()));
    };
    let mut slots = Vec::new();
    let mut year = first_year;
    for (y, letter) in kept {
        while year < y {
            slots.push(None);
            year += 1;
        }
        slots.push(letter);
        year += 1;
    }
    let series = LabeledSeries {
        first_year,
        sequence: BinarySequence::from_slots(slots)?,
    };
    if let Some(expected) = &config.expected {
        series.check_totals(expected)?;
    }
    Ok(series)
}

pub fn load_labeled_series(path: &Path, config: &SeriesConfig) -> Result<LabeledSeries> {
    parse_labeled_series(&std::fs::read_to_string(path)?, config)
}

/// One row per slot, missing slots with a blank winner.
pub fn labeled_series_to_csv(series: &LabeledSeries, config: &SeriesConfig) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["year", "winner"]).map_err(csv_error)?;
    for (t, s) in series.sequence.slots().iter().enumerate() {
        let label = match s {
            Some(0) => config.label0.as_str(),
            Some(_) => config.label1.as_str(),
            None => "",
        };
        w.write_record([(series.first_year + t as i64).to_string().as_str(), label])
            .map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// Oxford–Cambridge boat race winners by year, 1829–2021.
pub const BOAT_RACE_CSV: &str = include_str!("../data/boat_race.csv");

/// The bundled boat-race series, checked against its expected totals.
pub fn boat_race() -> Result<LabeledSeries> {
    parse_labeled_series(BOAT_RACE_CSV, &SeriesConfig::boat_race())
}

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Software {
    pub name: String,
    pub version: String,
}

/// Machine-readable result of one command. Contains no timestamps, so equal
/// inputs and seeds give byte-identical output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub software: Software,
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub seeds: Vec<u64>,
    pub payload: serde_json::Value,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunReport {
    pub fn new<T: Serialize>(command: &str, payload: &T) -> Result<Self> {
        Ok(RunReport {
            schema_version: REPORT_SCHEMA_VERSION,
            software: Software {
                name: env!("CARGO_PKG_NAME").into(),
                version: env!("CARGO_PKG_VERSION").into(),
            },
            command: command.into(),
            inputs: Vec::new(),
            seeds: Vec::new(),
            payload: serde_json::to_value(payload).map_err(|e| Error::Io(e.to_string()))?,
        })
    }

    pub fn with_input(mut self, name: &str, bytes: &[u8]) -> Self {
        self.inputs.push(InputDigest {
            name: name.into(),
            sha256: sha256_hex(bytes),
        });
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seeds.push(seed);
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequence_text_examples() {
        let s = parse_sequence_text("0011-01").unwrap();
        assert_eq!(s.segments(), vec![vec![0, 0, 1, 1], vec![0, 1]]);
        let s = parse_sequence_text("##c\n01 10").unwrap();
        assert_eq!(s.segments(), vec![vec![0, 1, 1, 0]]);
        assert!(matches!(parse_sequence_text("--"), Err(Error::Dataset(_))));
        assert_eq!(
            parse_sequence_text("01\n0x1").unwrap_err(),
            Error::Parse {
                line: 2,
                column: 2,
                message: "unexpected character 'x'".into()
            }
        );
    }

    #[test]
    fn sequence_text_round_trip() {
        let s = parse_sequence_text("# header\n0-1\n--10 1\n").unwrap();
        assert_eq!(parse_sequence_text(&sequence_to_text(&s)).unwrap(), s);
    }

    #[test]
    fn blank_winner_is_a_gap() {
        let cfg = SeriesConfig::new("A", "B");
        let s = parse_labeled_series("year,winner\n2000,A\n2001,\n", &cfg).unwrap();
        assert_eq!(s.sequence.slots(), &[Some(0), None]);
        assert_eq!(s.sequence.observed(), 1);
    }

    #[test]
    fn skipped_years_and_errors() {
        let cfg = SeriesConfig::new("A", "B");
        let s = parse_labeled_series("year,winner\n2000,A\n2003,B\n", &cfg).unwrap();
        assert_eq!(s.sequence.to_letter_string(), "0--1");
        assert_eq!(s.last_year(), 2003);
        assert!(matches!(
            parse_labeled_series("year,winner\n2000,A\n1999,B\n", &cfg),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse_labeled_series("year,winner\n2000,A\n2001,C\n", &cfg),
            Err(Error::Parse { line: 3, column: 2, .. })
        ));
        assert!(parse_labeled_series("year,winner\n2000,A\n2000,B\n", &cfg).is_err());
    }

    #[test]
    fn bundled_boat_race() {
        let s = boat_race().unwrap();
        assert_eq!(s.first_year, 1829);
        assert_eq!(s.last_year(), 2021);
        assert_eq!(s.sequence.letter_totals(), (79, 85));
        let lens: Vec<usize> = s.sequence.segments().iter().map(Vec::len).collect();
        assert_eq!(lens, vec![1, 1, 4, 2, 1, 1, 1, 21, 37, 20, 74, 1]);
    }

    #[test]
    fn totals_are_enforced() {
        let mut cfg = SeriesConfig::boat_race();
        cfg.exclude.pop();
        assert!(parse_labeled_series(BOAT_RACE_CSV, &cfg).is_err());
        let mut cfg = SeriesConfig::boat_race();
        cfg.expected.as_mut().unwrap().zeros = 80;
        assert!(matches!(parse_labeled_series(BOAT_RACE_CSV, &cfg), Err(Error::Dataset(_))));
    }

    #[test]
    fn labeled_round_trip() {
        let cfg = SeriesConfig::boat_race();
        let s = boat_race().unwrap();
        let text = labeled_series_to_csv(&s, &cfg).unwrap();
        assert_eq!(parse_labeled_series(&text, &cfg).unwrap(), s);
    }

    #[test]
    fn config_json() {
        let cfg = SeriesConfig::from_json(r#"{"label0":"Oxford","label1":"Cambridge","exclude":[{"year":1877}]}"#).unwrap();
        assert_eq!(cfg.exclude[0].occurrence, 1);
        assert!(cfg.expected.is_none());
    }

    #[test]
    fn report_is_stable() {
        let a = RunReport::new("counts", &vec![1, 2]).unwrap().with_input("x", b"abc").with_seed(3);
        let b = RunReport::new("counts", &vec![1, 2]).unwrap().with_input("x", b"abc").with_seed(3);
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(
            a.inputs[0].sha256,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
