//! Shared helpers for integration tests.
//!
//! `brute_force_positions` is an independent implementation of the
//! supported-position inventory: a plain recursive walk over a fresh
//! tree-sitter parse, written without reference to the library's location
//! code. Tests compare the two by set equality so an inventory bug in
//! either implementation surfaces as a diff.

use std::collections::BTreeSet;
use std::path::PathBuf;

use cryptomut_core::api_model::PlacementKind;

/// (file, kind, byte offset of the block's `{`).
pub type Position = (PathBuf, PlacementKind, usize);

pub fn parse_java(text: &str) -> tree_sitter::Tree {
    let mut parser = tree_sitter::Parser::new();
    parser
        .set_language(&tree_sitter_java::LANGUAGE.into())
        .expect("grammar loads");
    parser.parse(text, None).expect("parse returns a tree")
}

/// The inventory rules, restated from scratch:
/// - every method and constructor body;
/// - every static initializer block and instance initializer block;
/// - every `if` consequence block and `else` block (an `else if` counts
///   through the nested `if`);
/// - every named class body;
/// - every anonymous class body.
/// Nothing else: loop bodies, try/catch/finally blocks, lambda bodies,
/// switch blocks, synchronized blocks, interface and enum bodies are all
/// out.
pub fn brute_force_positions(file: &PathBuf, text: &str) -> BTreeSet<Position> {
    let tree = parse_java(text);
    let mut out = BTreeSet::new();
    collect(tree.root_node(), file, &mut out);
    out
}

fn collect(node: tree_sitter::Node, file: &PathBuf, out: &mut BTreeSet<Position>) {
    let push = |out: &mut BTreeSet<Position>, kind: PlacementKind, n: tree_sitter::Node| {
        out.insert((file.clone(), kind, n.start_byte()));
    };
    match node.kind() {
        "method_declaration" | "constructor_declaration" => {
            if let Some(body) = node.child_by_field_name("body") {
                push(out, PlacementKind::MethodBodyStart, body);
            }
        }
        "static_initializer" => {
            let mut cursor = node.walk();
            for child in node.named_children(&mut cursor) {
                if child.kind() == "block" {
                    push(out, PlacementKind::MethodBodyStart, child);
                }
            }
        }
        "block" => {
            let is_instance_init = node
                .parent()
                .map(|p| p.kind() == "class_body")
                .unwrap_or(false);
            if is_instance_init {
                push(out, PlacementKind::MethodBodyStart, node);
            }
        }
        "if_statement" => {
            for field in ["consequence", "alternative"] {
                if let Some(branch) = node.child_by_field_name(field) {
                    if branch.kind() == "block" {
                        push(out, PlacementKind::StatementInConditional, branch);
                    }
                }
            }
        }
        "class_declaration" => {
            if let Some(body) = node.child_by_field_name("body") {
                push(out, PlacementKind::ClassBody, body);
            }
        }
        "object_creation_expression" => {
            let mut cursor = node.walk();
            for child in node.named_children(&mut cursor) {
                if child.kind() == "class_body" {
                    push(out, PlacementKind::AnonymousInnerBody, child);
                }
            }
        }
        _ => {}
    }
    let mut cursor = node.walk();
    for child in node.named_children(&mut cursor) {
        collect(child, file, out);
    }
}

/// The four exhaustive-scope kinds.
pub const EXHAUSTIVE_KINDS: [PlacementKind; 4] = [
    PlacementKind::MethodBodyStart,
    PlacementKind::StatementInConditional,
    PlacementKind::ClassBody,
    PlacementKind::AnonymousInnerBody,
];
