//! Line-oriented interaction scripts.
//!
//! ```text
//! # comment
//! expand incipit:justification
//! ground rule:r_it
//! source rule:r_it
//! mark rebuttal:r_it supports "lawful under Italian law"
//! mark rule:r_gdpr attacks a1 "the general rule still applies"
//! whatif age(marco)=13, jurisdiction(marco)=france
//! ```

use thiserror::Error;

use crate::counterfactual::parse_mutations;
use crate::es::Interaction;
use crate::narrative::{ArgumentTarget, Stance};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ScriptError {
    pub line: usize,
    pub message: String,
}

/// A parsed script line with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptLine {
    pub line: usize,
    pub interaction: Interaction,
}

pub fn parse_script(text: &str) -> Result<Vec<ScriptLine>, ScriptError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let interaction = parse_line(line).map_err(|message| ScriptError { line: i + 1, message })?;
        out.push(ScriptLine {
            line: i + 1,
            interaction,
        });
    }
    Ok(out)
}

pub fn parse_line(line: &str) -> Result<Interaction, String> {
    let line = line.trim();
    let (verb, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
    let rest = rest.trim();
    let target = || -> Result<String, String> {
        if rest.is_empty() || rest.contains(char::is_whitespace) {
            Err(format!("`{verb}` takes exactly one node id"))
        } else {
            Ok(rest.to_string())
        }
    };
    match verb {
        "expand" => Ok(Interaction::Expand { target: target()? }),
        "ground" => Ok(Interaction::Ground { target: target()? }),
        "source" => Ok(Interaction::Source { target: target()? }),
        "mark" => parse_mark(rest),
        "whatif" => {
            let mutations = parse_mutations(rest).map_err(|e| e.to_string())?;
            if mutations.is_empty() {
                return Err("`whatif` needs at least one attribute=value".into());
            }
            Ok(Interaction::WhatIf {
                target: None,
                mutations,
            })
        }
        other => Err(format!(
            "unknown action `{other}` (expected expand, ground, source, mark or whatif)"
        )),
    }
}

fn parse_mark(rest: &str) -> Result<Interaction, String> {
    let usage = "usage: mark <node-id> supports|attacks [<argument-id>] \"<claim>\"";
    let quote = rest.find('"').ok_or(usage)?;
    let head: Vec<&str> = rest[..quote].split_whitespace().collect();
    let claim = unquote(&rest[quote..])?;
    let (target, stance, argument_target) = match head.as_slice() {
        [node, stance] => (node, stance, ArgumentTarget::Decision),
        [node, stance, arg] => (node, stance, ArgumentTarget::Argument(arg.to_string())),
        _ => return Err(usage.into()),
    };
    Ok(Interaction::Mark {
        target: target.to_string(),
        stance: stance.parse::<Stance>()?,
        claim,
        argument_target,
    })
}

/// Reads one double-quoted string that must end the line.
fn unquote(s: &str) -> Result<String, String> {
    let mut out = String::new();
    let mut chars = s[1..].chars();
    loop {
        match chars.next() {
            None => return Err("unterminated claim string".into()),
            Some('"') => break,
            Some('\\') => match chars.next() {
                Some('n') => out.push('\n'),
                Some('t') => out.push('\t'),
                Some(c @ ('"' | '\\' | '\'')) => out.push(c),
                _ => return Err("bad escape in claim string".into()),
            },
            Some(c) => out.push(c),
        }
    }
    if !chars.as_str().trim().is_empty() {
        return Err("unexpected text after the claim".into());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_action() {
        let s = parse_script(
            "# walk\nexpand incipit:justification\n\nmark rebuttal:r_it supports \"lawful \\\"here\\\"\"\nmark rule:r_gdpr attacks a1 \"no\"\nwhatif age(marco)=13\n",
        )
        .unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s[0].line, 2);
        assert_eq!(s[1].interaction.to_string(), "mark rebuttal:r_it supports \"lawful \\\"here\\\"\"");
        assert_eq!(s[2].interaction.to_string(), "mark rule:r_gdpr attacks a1 \"no\"");
        assert_eq!(s[3].line, 6);
    }

    #[test]
    fn display_round_trips() {
        for line in [
            "expand rule:r_it",
            "ground premise:f_age",
            "source incipit:justification",
            "mark rule:r_it attacks \"x y\"",
            "whatif age(marco)=13,jurisdiction(marco)=france",
        ] {
            assert_eq!(parse_line(line).unwrap().to_string(), line);
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_script("expand rule:r_it\nfly away\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(parse_line("mark rule:r_it maybe \"x\"").is_err());
        assert!(parse_line("mark rule:r_it supports \"open").is_err());
        assert!(parse_line("whatif").is_err());
        assert!(parse_line("expand").is_err());
    }
}
