//! The command surface: every command a product exposes, its parameters, and
//! their documentation strings.
//!
//! A surface is loaded from a JSON file, validated once, and then shared
//! read-only by every other stage of the pipeline.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifier::ParamType;

#[derive(Debug, thiserror::Error)]
pub enum SurfaceError {
    #[error("cannot read surface file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed surface file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("surface prefix is empty")]
    EmptyPrefix,
    #[error("command with empty name in module `{module}`")]
    EmptyCommandName { module: String },
    #[error("duplicate command `{0}`")]
    DuplicateCommand(String),
    #[error("command `{command}`: invalid parameter name `{parameter}`")]
    InvalidParameterName { command: String, parameter: String },
    #[error("command `{command}`: duplicate parameter `{parameter}`")]
    DuplicateParameter { command: String, parameter: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSpec {
    pub name: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub required: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labeled_type: Option<ParamType>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CommandSpec {
    pub module: String,
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub parameters: Vec<ParameterSpec>,
    /// Name or alias -> index into `parameters`.
    #[serde(skip)]
    names: HashMap<String, usize>,
}

impl PartialEq for CommandSpec {
    fn eq(&self, other: &Self) -> bool {
        self.module == other.module
            && self.name == other.name
            && self.description == other.description
            && self.parameters == other.parameters
    }
}

impl CommandSpec {
    pub fn new(
        module: impl Into<String>,
        name: impl Into<String>,
        description: impl Into<String>,
        parameters: Vec<ParameterSpec>,
    ) -> Self {
        CommandSpec {
            module: module.into(),
            name: name.into(),
            description: description.into(),
            parameters,
            names: HashMap::new(),
        }
    }

    /// Resolves a parameter by canonical name or alias. Leading dashes are ignored.
    pub fn parameter(&self, name: &str) -> Option<&ParameterSpec> {
        self.names.get(strip_dashes(name)).map(|&i| &self.parameters[i])
    }

    /// Canonical name for a name-or-alias.
    pub fn canonical_parameter(&self, name: &str) -> Option<&str> {
        self.parameter(name).map(|p| p.name.as_str())
    }

    /// First command-path token, e.g. `vm` for `vm create`.
    pub fn group(&self) -> &str {
        command_group(&self.name)
    }

    fn validate(&mut self) -> Result<(), SurfaceError> {
        self.name = normalize_command(&self.name);
        if self.name.is_empty() {
            return Err(SurfaceError::EmptyCommandName { module: self.module.clone() });
        }
        self.names.clear();
        for (i, param) in self.parameters.iter_mut().enumerate() {
            param.name = strip_dashes(&param.name).to_string();
            for alias in &mut param.aliases {
                *alias = strip_dashes(alias).to_string();
            }
            let keys = std::iter::once(&param.name).chain(param.aliases.iter());
            for key in keys {
                if key.is_empty() || key.chars().any(char::is_whitespace) {
                    return Err(SurfaceError::InvalidParameterName {
                        command: self.name.clone(),
                        parameter: key.clone(),
                    });
                }
                if self.names.insert(key.clone(), i).is_some() {
                    return Err(SurfaceError::DuplicateParameter {
                        command: self.name.clone(),
                        parameter: key.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
struct RawSurface {
    prefix: String,
    #[serde(default)]
    version: String,
    #[serde(default)]
    commands: Vec<CommandSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawSurface")]
pub struct CommandSurface {
    pub prefix: String,
    pub version: String,
    commands: Vec<CommandSpec>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl PartialEq for CommandSurface {
    fn eq(&self, other: &Self) -> bool {
        self.prefix == other.prefix && self.version == other.version && self.commands == other.commands
    }
}

impl TryFrom<RawSurface> for CommandSurface {
    type Error = SurfaceError;

    fn try_from(raw: RawSurface) -> Result<Self, Self::Error> {
        CommandSurface::new(raw.prefix, raw.version, raw.commands)
    }
}

impl CommandSurface {
    /// Builds and validates a surface. Command names are whitespace-normalized
    /// and parameter names lose any leading dashes.
    pub fn new(
        prefix: impl Into<String>,
        version: impl Into<String>,
        mut commands: Vec<CommandSpec>,
    ) -> Result<Self, SurfaceError> {
        let prefix = prefix.into().trim().to_string();
        if prefix.is_empty() {
            return Err(SurfaceError::EmptyPrefix);
        }
        let mut index = HashMap::with_capacity(commands.len());
        for (i, command) in commands.iter_mut().enumerate() {
            command.validate()?;
            if index.insert(command.name.clone(), i).is_some() {
                return Err(SurfaceError::DuplicateCommand(command.name.clone()));
            }
        }
        Ok(CommandSurface { prefix, version: version.into(), commands, index })
    }

    pub fn from_json(text: &str) -> Result<Self, SurfaceError> {
        let raw: RawSurface = serde_json::from_str(text)?;
        CommandSurface::try_from(raw)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("surface serializes")
    }

    pub fn commands(&self) -> &[CommandSpec] {
        &self.commands
    }

    pub fn len(&self) -> usize {
        self.commands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.commands.is_empty()
    }

    /// Finds a command by name; runs of whitespace in the query are collapsed.
    pub fn lookup_command(&self, name: &str) -> Option<&CommandSpec> {
        let key = normalize_command(name);
        self.index.get(&key).map(|&i| &self.commands[i])
    }
}

pub fn load_surface(path: impl AsRef<Path>) -> Result<CommandSurface, SurfaceError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| SurfaceError::Io { path: path.to_path_buf(), source })?;
    CommandSurface::from_json(&text)
}

/// Collapses whitespace: `" vm  create "` becomes `"vm create"`.
pub fn normalize_command(name: &str) -> String {
    name.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn command_group(command: &str) -> &str {
    command.split_whitespace().next().unwrap_or("")
}

pub(crate) fn strip_dashes(name: &str) -> &str {
    name.trim_start_matches('-')
}
