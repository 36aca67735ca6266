//! Tab-separated labeled parameter data.
//!
//! Header: `parameter_name command_name module_name parameter_description
//! command_description label`. Labels use the serialized type names.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::features::{LabeledParam, ParamContext};
use super::{ClassifierError, ParamType};

#[derive(Serialize, Deserialize)]
struct Record {
    parameter_name: String,
    command_name: String,
    module_name: String,
    parameter_description: String,
    command_description: String,
    label: String,
}

fn tsv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().delimiter(b'\t').quoting(false).has_headers(true).from_reader(reader)
}

pub fn parse_labeled_tsv<R: Read>(reader: R) -> Result<Vec<LabeledParam>, ClassifierError> {
    let mut out = Vec::new();
    for (i, rec) in tsv_reader(reader).deserialize::<Record>().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| ClassifierError::Data { line, message: e.to_string() })?;
        let label: ParamType = rec
            .label
            .trim()
            .parse()
            .map_err(|e: super::UnknownParamType| ClassifierError::Data { line, message: e.to_string() })?;
        if rec.parameter_name.trim().is_empty() {
            return Err(ClassifierError::Data { line, message: "empty parameter_name".into() });
        }
        out.push(LabeledParam {
            context: ParamContext {
                parameter_name: rec.parameter_name,
                command_name: rec.command_name,
                module_name: rec.module_name,
                parameter_description: rec.parameter_description,
                command_description: rec.command_description,
            },
            label,
        });
    }
    Ok(out)
}

pub fn read_labeled_tsv(path: &Path) -> Result<Vec<LabeledParam>, ClassifierError> {
    let file = File::open(path).map_err(|source| ClassifierError::Io { path: path.to_path_buf(), source })?;
    parse_labeled_tsv(file)
}

/// Tabs and newlines inside fields are replaced by spaces.
pub fn write_labeled_tsv<W: Write>(mut w: W, rows: &[LabeledParam]) -> std::io::Result<()> {
    let clean = |s: &str| s.replace(['\t', '\n', '\r'], " ");
    writeln!(w, "parameter_name\tcommand_name\tmodule_name\tparameter_description\tcommand_description\tlabel")?;
    for p in rows {
        let c = &p.context;
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}\t{}",
            clean(&c.parameter_name),
            clean(&c.command_name),
            clean(&c.module_name),
            clean(&c.parameter_description),
            clean(&c.command_description),
            p.label.name()
        )?;
    }
    Ok(())
}
