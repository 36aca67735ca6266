use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The closed taxonomy of parameter value types.
///
/// Variant order is the label order used for tie-breaking everywhere a
/// prediction has to pick between equally likely classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ParamType {
    String,
    Enum,
    Integer,
    #[serde(rename = "GUID")]
    Guid,
    FolderFilePath,
    CommandSpecificUnknown,
    #[serde(rename = "IPAddress")]
    IpAddress,
    UrlEmail,
    BuildInfo,
    QuotedStrings,
    Version,
    TimeDuration,
    KeysTokens,
    IntWithSpecificFormat,
    PermissionFormats,
}

impl ParamType {
    pub const ALL: [ParamType; 15] = [
        ParamType::String,
        ParamType::Enum,
        ParamType::Integer,
        ParamType::Guid,
        ParamType::FolderFilePath,
        ParamType::CommandSpecificUnknown,
        ParamType::IpAddress,
        ParamType::UrlEmail,
        ParamType::BuildInfo,
        ParamType::QuotedStrings,
        ParamType::Version,
        ParamType::TimeDuration,
        ParamType::KeysTokens,
        ParamType::IntWithSpecificFormat,
        ParamType::PermissionFormats,
    ];

    /// Every type except `String`, in label order. These are the stage-two classes.
    pub const NON_STRING: [ParamType; 14] = [
        ParamType::Enum,
        ParamType::Integer,
        ParamType::Guid,
        ParamType::FolderFilePath,
        ParamType::CommandSpecificUnknown,
        ParamType::IpAddress,
        ParamType::UrlEmail,
        ParamType::BuildInfo,
        ParamType::QuotedStrings,
        ParamType::Version,
        ParamType::TimeDuration,
        ParamType::KeysTokens,
        ParamType::IntWithSpecificFormat,
        ParamType::PermissionFormats,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<ParamType> {
        Self::ALL.get(index).copied()
    }

    /// Position among the non-string classes; `None` for `String`.
    pub fn non_string_index(self) -> Option<usize> {
        self.index().checked_sub(1)
    }

    pub fn is_string(self) -> bool {
        self == ParamType::String
    }

    /// Stable serialized name.
    pub fn name(self) -> &'static str {
        match self {
            ParamType::String => "String",
            ParamType::Enum => "Enum",
            ParamType::Integer => "Integer",
            ParamType::Guid => "GUID",
            ParamType::FolderFilePath => "FolderFilePath",
            ParamType::CommandSpecificUnknown => "CommandSpecificUnknown",
            ParamType::IpAddress => "IPAddress",
            ParamType::UrlEmail => "UrlEmail",
            ParamType::BuildInfo => "BuildInfo",
            ParamType::QuotedStrings => "QuotedStrings",
            ParamType::Version => "Version",
            ParamType::TimeDuration => "TimeDuration",
            ParamType::KeysTokens => "KeysTokens",
            ParamType::IntWithSpecificFormat => "IntWithSpecificFormat",
            ParamType::PermissionFormats => "PermissionFormats",
        }
    }

    /// Human-facing label used in evaluation reports.
    pub fn display_name(self) -> &'static str {
        match self {
            ParamType::String => "String",
            ParamType::Enum => "Enum",
            ParamType::Integer => "Integer",
            ParamType::Guid => "GUID",
            ParamType::FolderFilePath => "Folder/File Path",
            ParamType::CommandSpecificUnknown => "Command Specific/Unknown",
            ParamType::IpAddress => "IP-Address",
            ParamType::UrlEmail => "URL/E-Mail",
            ParamType::BuildInfo => "Build Info",
            ParamType::QuotedStrings => "Quoted Strings",
            ParamType::Version => "Version",
            ParamType::TimeDuration => "Time/Duration",
            ParamType::KeysTokens => "Keys/Tokens",
            ParamType::IntWithSpecificFormat => "Int With Specific Format",
            ParamType::PermissionFormats => "Permission Formats",
        }
    }
}

impl fmt::Display for ParamType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown parameter type `{0}`")]
pub struct UnknownParamType(pub String);

impl FromStr for ParamType {
    type Err = UnknownParamType;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ParamType::ALL.iter().copied().find(|t| t.name() == s).ok_or_else(|| UnknownParamType(s.to_string()))
    }
}
