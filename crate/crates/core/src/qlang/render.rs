use super::QueryNode;
use crate::index::Field;

/// Canonical text form; `parse(&render(n)) == Ok(n)` for every node the
/// parser can produce.
pub fn render(node: &QueryNode) -> String {
    let mut out = String::new();
    write_node(node, &mut out);
    out
}

// Author names keep their comma but lose the space so they stay one word.
fn word(text: &str) -> String {
    text.replace(", ", ",")
}

fn prefix(field: Field, out: &mut String) {
    if field != Field::All {
        out.push_str(field.as_str());
        out.push(':');
    }
}

fn write_child(child: &QueryNode, parent: &QueryNode, out: &mut String) {
    let wrap = match (parent, child) {
        (QueryNode::Or(_), QueryNode::And(_)) => false,
        (_, QueryNode::And(_) | QueryNode::Or(_)) => true,
        _ => false,
    };
    if wrap {
        out.push('(');
        write_node(child, out);
        out.push(')');
    } else {
        write_node(child, out);
    }
}

fn write_node(node: &QueryNode, out: &mut String) {
    match node {
        QueryNode::And(children) | QueryNode::Or(children) => {
            let sep = if matches!(node, QueryNode::And(_)) {
                " "
            } else {
                " OR "
            };
            for (i, c) in children.iter().enumerate() {
                if i > 0 {
                    out.push_str(sep);
                }
                write_child(c, node, out);
            }
        }
        QueryNode::Not(child) => {
            out.push_str("NOT ");
            write_child(child, node, out);
        }
        QueryNode::Term(t) => {
            prefix(t.field, out);
            if !t.synonyms {
                out.push('=');
            }
            out.push_str(&word(&t.text));
            if let Some(f) = t.fuzz {
                out.push('~');
                out.push_str(&f.to_string());
            }
        }
        QueryNode::Phrase { field, terms } => {
            prefix(*field, out);
            out.push('"');
            out.push_str(&terms.join(" ").replace('\\', "\\\\").replace('"', "\\\""));
            out.push('"');
        }
        QueryNode::Proximity {
            field,
            left,
            right,
            distance,
        } => {
            prefix(*field, out);
            out.push_str(&format!("({} NEAR{distance} {})", word(left), word(right)));
        }
        QueryNode::Regex { field, pattern } => {
            prefix(*field, out);
            out.push('/');
            out.push_str(&pattern.replace('/', "\\/"));
            out.push('/');
        }
        QueryNode::Func { op, inner } => {
            out.push_str(op.name());
            out.push('(');
            write_node(inner, out);
            out.push(')');
        }
    }
}
