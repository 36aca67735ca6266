//! Rendered help and markdown for a fixed command, compared against files
//! checked in under `tests/golden`. Set `EXFORGE_BLESS=1` to rewrite them.

use std::path::PathBuf;

use exforge_core::classifier::ParamType;
use exforge_core::emit::{parse_doc, render_help, render_markdown, HumanExample};
use exforge_core::filler::{FilledArgument, FilledExample, Provenance};
use exforge_core::surface::{CommandSpec, CommandSurface, ParameterSpec};

fn surface() -> CommandSurface {
    let p = |name: &str, aliases: &[&str], required: bool, description: &str| ParameterSpec {
        name: name.into(),
        aliases: aliases.iter().map(|a| a.to_string()).collect(),
        description: description.into(),
        required,
        labeled_type: None,
    };
    CommandSurface::new(
        "az",
        "2.50.0",
        vec![CommandSpec::new(
            "keyvault",
            "keyvault update",
            "Update the properties of a key vault.",
            vec![
                p("name", &["n"], true, "Name of the key vault."),
                p("resource-group", &["g"], false, "Name of resource group."),
                p(
                    "enabled-for-deployment",
                    &[],
                    false,
                    "Allow virtual machines to retrieve certificates stored as secrets.",
                ),
                p("retention-days", &[], false, "Soft delete data retention days."),
                p("default-action", &[], false, "Default action when no rule matches. Allowed values: Allow, Deny."),
            ],
        )],
    )
    .unwrap()
}

fn arg(name: &str, value: &str, provenance: Provenance, t: ParamType) -> FilledArgument {
    FilledArgument {
        name: name.into(),
        value: value.into(),
        provenance,
        quoted: false,
        param_type: Some(t),
        confidence: 0.9,
    }
}

fn examples() -> Vec<FilledExample> {
    vec![
        FilledExample {
            command: "keyvault update".into(),
            arguments: vec![
                arg("name", "MyKeyVault", Provenance::Lookup, ParamType::String),
                arg("resource-group", "MyResourceGroup", Provenance::Lookup, ParamType::String),
                arg("enabled-for-deployment", "true", Provenance::Lookup, ParamType::Enum),
            ],
            rank: 1,
        },
        FilledExample {
            command: "keyvault update".into(),
            arguments: vec![
                arg("name", "MyKeyVault", Provenance::Synthesized, ParamType::String),
                arg("retention-days", "<retention-days>", Provenance::Placeholder, ParamType::Integer),
                arg("default-action", "Deny", Provenance::Lookup, ParamType::Enum),
            ],
            rank: 2,
        },
    ]
}

fn check(name: &str, actual: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("EXFORGE_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "{name} drifted; rerun with EXFORGE_BLESS=1 if intended");
}

#[test]
fn keyvault_update_help() {
    let s = surface();
    let spec = s.lookup_command("keyvault update").unwrap();
    check("keyvault-update.txt", &render_help(spec, &examples(), "az").unwrap());
}

#[test]
fn keyvault_update_markdown() {
    let s = surface();
    let spec = s.lookup_command("keyvault update").unwrap();
    let human = vec![HumanExample {
        summary: "Turn on purge protection.".into(),
        lines: vec!["az keyvault update --name MyKeyVault --enable-purge-protection true".into()],
    }];
    let md = render_markdown(spec, &examples(), &human, "az", "azurecli").unwrap();
    check("keyvault-update.md", &md);

    // The rendered section reads back with the human example first and the
    // generated ones marked.
    let sections = parse_doc(&md, "az");
    assert_eq!(sections.len(), 1);
    let flags: Vec<bool> = sections[0].examples.iter().map(|e| e.autogenerated).collect();
    assert_eq!(flags, [false, true, true]);
    assert_eq!(sections[0].human_examples(), human);
}
