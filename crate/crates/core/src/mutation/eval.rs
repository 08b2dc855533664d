//! Independent effective-value oracle for restrictive snippets.
//!
//! The generators in [`super::restrictive`] claim an `effective_value` for
//! every mutant; this module re-derives that value *from the snippet text
//! alone* by parsing it and interpreting the tiny Java subset the operators
//! emit: literals, concatenation, case/replace transforms, counting loops
//! over character codes, fluent helper chains, and the symbolic
//! wall-clock-time construction.

use std::collections::HashMap;

use tree_sitter::{Node, Parser};

use crate::error::{Error, Result};
use crate::mutation::restrictive::SYSTEM_TIME_SYMBOL;
use crate::mutation::Snippet;

/// Re-derive the string value reaching the snippet's final factory call.
///
/// Errors with [`Error::UnsupportedExpression`] whenever the snippet strays
/// outside the interpretable subset — deliberately strict, so silent
/// mis-evaluation cannot mask a generator bug.
pub fn effective_value_oracle(snippet: &Snippet) -> Result<String> {
    let src = wrap(snippet);
    let mut parser = Parser::new();
    parser
        .set_language(&tree_sitter_java::LANGUAGE.into())
        .expect("bundled Java grammar must load");
    let tree = parser
        .parse(&src, None)
        .ok_or_else(|| unsupported("snippet did not parse"))?;
    if tree.root_node().has_error() {
        return Err(unsupported("snippet has syntax errors"));
    }

    let mut interp = Interp {
        src: src.as_bytes(),
        defs: HashMap::new(),
        env: HashMap::new(),
    };

    let root = tree.root_node();
    let mut run_body = None;
    let mut cursor = root.walk();
    for class in root.named_children(&mut cursor) {
        if class.kind() != "class_declaration" {
            continue;
        }
        let name = interp.text(field(class, "name")?);
        if name == WRAPPER_CLASS {
            run_body = find_run_body(class, &interp)?;
        } else {
            let def = interp.collect_helper(class)?;
            interp.defs.insert(name.to_string(), def);
        }
    }
    let body = run_body.ok_or_else(|| unsupported("no statements to interpret"))?;

    let mut last_call = None;
    let mut cursor = body.walk();
    for stmt in body.named_children(&mut cursor) {
        if let Some(call) = interp.exec(stmt)? {
            last_call = Some(call);
        }
    }
    let call = last_call.ok_or_else(|| unsupported("no trailing factory call"))?;
    interp.first_string_argument(call)
}

const WRAPPER_CLASS: &str = "OracleWrap";

fn wrap(snippet: &Snippet) -> String {
    let mut src = String::new();
    for helper in &snippet.helper_declarations {
        src.push_str(helper);
        src.push('\n');
    }
    src.push_str("class ");
    src.push_str(WRAPPER_CLASS);
    src.push_str(" {\n    void run() throws Exception {\n");
    for stmt in &snippet.statements {
        for line in stmt.lines() {
            src.push_str("        ");
            src.push_str(line);
            src.push('\n');
        }
    }
    src.push_str("    }\n}\n");
    src
}

fn unsupported(detail: &str) -> Error {
    Error::UnsupportedExpression(detail.to_string())
}

fn field<'t>(node: Node<'t>, name: &str) -> Result<Node<'t>> {
    node.child_by_field_name(name)
        .ok_or_else(|| unsupported(&format!("`{}` node without `{name}`", node.kind())))
}

fn find_run_body<'t>(class: Node<'t>, interp: &Interp) -> Result<Option<Node<'t>>> {
    let body = field(class, "body")?;
    let mut cursor = body.walk();
    for member in body.named_children(&mut cursor) {
        if member.kind() == "method_declaration" && interp.text(field(member, "name")?) == "run" {
            return Ok(Some(field(member, "body")?));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone)]
enum Val {
    Str(String),
    Obj {
        class: String,
        fields: HashMap<String, String>,
    },
    /// A freshly constructed `Date(System.currentTimeMillis())`.
    DateNow,
}

#[derive(Debug)]
enum MethodDef {
    /// Field assignments followed by `return this;`.
    Chain(Vec<(String, String)>),
    /// `return <field>;`
    Getter(String),
}

#[derive(Debug, Default)]
struct HelperDef {
    field_inits: HashMap<String, String>,
    methods: HashMap<String, MethodDef>,
}

struct Interp<'s> {
    src: &'s [u8],
    defs: HashMap<String, HelperDef>,
    env: HashMap<String, Val>,
}

impl<'s> Interp<'s> {
    fn text(&self, node: Node) -> &'s str {
        node.utf8_text(self.src).unwrap_or("")
    }

    fn squashed(&self, node: Node) -> String {
        self.text(node).split_whitespace().collect()
    }

    /// Token text between two child nodes (used for operators, which not
    /// every grammar version exposes as a field).
    fn between(&self, left: Node, right: Node) -> &'s str {
        std::str::from_utf8(&self.src[left.end_byte()..right.start_byte()])
            .unwrap_or("")
            .trim()
    }

    /// Unquote and unescape a `string_literal` node.
    fn string_literal(&self, node: Node) -> Result<String> {
        let raw = self.text(node);
        let inner = raw
            .strip_prefix('"')
            .and_then(|s| s.strip_suffix('"'))
            .ok_or_else(|| unsupported("string literal quoting"))?;
        let mut out = String::with_capacity(inner.len());
        let mut chars = inner.chars();
        while let Some(c) = chars.next() {
            if c != '\\' {
                out.push(c);
                continue;
            }
            match chars.next() {
                Some('"') => out.push('"'),
                Some('\\') => out.push('\\'),
                Some('n') => out.push('\n'),
                Some('t') => out.push('\t'),
                Some('r') => out.push('\r'),
                _ => return Err(unsupported("string escape sequence")),
            }
        }
        Ok(out)
    }

    // -- helper-class harvesting -------------------------------------------

    fn collect_helper(&self, class: Node) -> Result<HelperDef> {
        let mut def = HelperDef::default();
        let body = field(class, "body")?;
        let mut cursor = body.walk();
        for member in body.named_children(&mut cursor) {
            match member.kind() {
                "field_declaration" => {
                    let declarator = field(member, "declarator")?;
                    let name = self.text(field(declarator, "name")?).to_string();
                    let value = field(declarator, "value")?;
                    if value.kind() != "string_literal" {
                        return Err(unsupported("helper field init is not a string literal"));
                    }
                    def.field_inits.insert(name, self.string_literal(value)?);
                }
                "method_declaration" => {
                    let name = self.text(field(member, "name")?).to_string();
                    def.methods
                        .insert(name, self.collect_method(field(member, "body")?)?);
                }
                _ => return Err(unsupported("helper class member outside the fluent shape")),
            }
        }
        Ok(def)
    }

    fn collect_method(&self, body: Node) -> Result<MethodDef> {
        let mut assigns = Vec::new();
        let mut cursor = body.walk();
        for stmt in body.named_children(&mut cursor) {
            match stmt.kind() {
                "expression_statement" => {
                    let expr = stmt
                        .named_child(0)
                        .ok_or_else(|| unsupported("empty expression statement"))?;
                    if expr.kind() != "assignment_expression" {
                        return Err(unsupported("helper method statement is not an assignment"));
                    }
                    let left = field(expr, "left")?;
                    let right = field(expr, "right")?;
                    if self.between(left, right) != "=" || right.kind() != "string_literal" {
                        return Err(unsupported("helper assignment outside the fluent shape"));
                    }
                    assigns
                        .push((self.text(left).to_string(), self.string_literal(right)?));
                }
                "return_statement" => {
                    let value = stmt
                        .named_child(0)
                        .ok_or_else(|| unsupported("bare return in helper"))?;
                    return Ok(match value.kind() {
                        "this" => MethodDef::Chain(assigns),
                        "identifier" => MethodDef::Getter(self.text(value).to_string()),
                        _ => return Err(unsupported("helper return shape")),
                    });
                }
                _ => return Err(unsupported("helper method statement kind")),
            }
        }
        Err(unsupported("helper method without return"))
    }

    // -- statement execution -----------------------------------------------

    /// Execute one statement; returns the call node when the statement is a
    /// bare invocation/creation (candidate final factory call).
    fn exec<'t>(&mut self, stmt: Node<'t>) -> Result<Option<Node<'t>>> {
        match stmt.kind() {
            "local_variable_declaration" => {
                let mut cursor = stmt.walk();
                for declarator in stmt.named_children(&mut cursor) {
                    if declarator.kind() != "variable_declarator" {
                        continue;
                    }
                    let name = self.text(field(declarator, "name")?).to_string();
                    let value = self.eval(field(declarator, "value")?)?;
                    self.env.insert(name, value);
                }
                Ok(None)
            }
            "expression_statement" => {
                let expr = stmt
                    .named_child(0)
                    .ok_or_else(|| unsupported("empty expression statement"))?;
                match expr.kind() {
                    "assignment_expression" => {
                        self.exec_assignment(expr)?;
                        Ok(None)
                    }
                    "method_invocation" | "object_creation_expression" => Ok(Some(expr)),
                    other => Err(unsupported(&format!("expression statement `{other}`"))),
                }
            }
            "for_statement" => {
                self.exec_char_loop(stmt)?;
                Ok(None)
            }
            other => Err(unsupported(&format!("statement `{other}`"))),
        }
    }

    fn exec_assignment(&mut self, expr: Node) -> Result<()> {
        let left = field(expr, "left")?;
        if left.kind() != "identifier" {
            return Err(unsupported("assignment target"));
        }
        let name = self.text(left).to_string();
        let right = field(expr, "right")?;
        let value = self.eval(right)?;
        match self.between(left, right) {
            "=" => {
                self.env.insert(name, value);
                Ok(())
            }
            "+=" => {
                let Val::Str(add) = value else {
                    return Err(unsupported("`+=` with non-string value"));
                };
                match self.env.get_mut(&name) {
                    Some(Val::Str(current)) => {
                        current.push_str(&add);
                        Ok(())
                    }
                    _ => Err(unsupported("`+=` on an unbound or non-string variable")),
                }
            }
            other => Err(unsupported(&format!("assignment operator `{other}`"))),
        }
    }

    /// Interpret `for (int i = A; i < B; i++) { v += (char) i; }`.
    fn exec_char_loop(&mut self, stmt: Node) -> Result<()> {
        let init = field(stmt, "init")?;
        if init.kind() != "local_variable_declaration" {
            return Err(unsupported("loop init"));
        }
        let declarator = field(init, "declarator")?;
        let counter = self.text(field(declarator, "name")?).to_string();
        let start: u32 = self
            .text(field(declarator, "value")?)
            .parse()
            .map_err(|_| unsupported("loop start bound"))?;

        let condition = field(stmt, "condition")?;
        if condition.kind() != "binary_expression" {
            return Err(unsupported("loop condition"));
        }
        let cond_left = field(condition, "left")?;
        let cond_right = field(condition, "right")?;
        if self.text(cond_left) != counter || self.between(cond_left, cond_right) != "<" {
            return Err(unsupported("loop condition shape"));
        }
        let end: u32 = self
            .text(cond_right)
            .parse()
            .map_err(|_| unsupported("loop end bound"))?;

        if self.squashed(field(stmt, "update")?) != format!("{counter}++") {
            return Err(unsupported("loop update"));
        }

        let body = field(stmt, "body")?;
        let mut cursor = body.walk();
        let inner: Vec<Node> = body.named_children(&mut cursor).collect();
        let [only] = inner[..] else {
            return Err(unsupported("loop body statement count"));
        };
        if only.kind() != "expression_statement" {
            return Err(unsupported("loop body statement"));
        }
        let assign = only
            .named_child(0)
            .ok_or_else(|| unsupported("loop body expression"))?;
        if assign.kind() != "assignment_expression" {
            return Err(unsupported("loop body is not an append"));
        }
        let left = field(assign, "left")?;
        let right = field(assign, "right")?;
        let target = self.text(left).to_string();
        if self.between(left, right) != "+="
            || right.kind() != "cast_expression"
            || self.text(field(right, "type")?) != "char"
            || self.text(field(right, "value")?) != counter
        {
            return Err(unsupported("loop body append shape"));
        }

        let appended: String = (start..end)
            .map(|code| char::from_u32(code).ok_or_else(|| unsupported("loop code point")))
            .collect::<Result<String>>()?;
        match self.env.get_mut(&target) {
            Some(Val::Str(current)) => {
                current.push_str(&appended);
                Ok(())
            }
            _ => Err(unsupported("loop appends to an unbound variable")),
        }
    }

    // -- expression evaluation ---------------------------------------------

    fn eval(&self, node: Node) -> Result<Val> {
        match node.kind() {
            "string_literal" => Ok(Val::Str(self.string_literal(node)?)),
            "identifier" => self
                .env
                .get(self.text(node))
                .cloned()
                .ok_or_else(|| unsupported(&format!("unbound variable `{}`", self.text(node)))),
            "parenthesized_expression" => self.eval(
                node.named_child(0)
                    .ok_or_else(|| unsupported("empty parentheses"))?,
            ),
            "binary_expression" => {
                let left = field(node, "left")?;
                let right = field(node, "right")?;
                if self.between(left, right) != "+" {
                    return Err(unsupported("binary operator"));
                }
                match (self.eval(left)?, self.eval(right)?) {
                    (Val::Str(a), Val::Str(b)) => Ok(Val::Str(a + &b)),
                    _ => Err(unsupported("non-string concatenation")),
                }
            }
            "method_invocation" => self.eval_invocation(node),
            "object_creation_expression" => self.eval_creation(node),
            other => Err(unsupported(&format!("expression `{other}`"))),
        }
    }

    fn eval_invocation(&self, node: Node) -> Result<Val> {
        let object = node
            .child_by_field_name("object")
            .ok_or_else(|| unsupported("receiverless call"))?;
        let name = self.text(field(node, "name")?);
        match self.eval(object)? {
            Val::Str(s) => match name {
                // Locale-style arguments are deliberately ignored: they do
                // not change the value for the ASCII algorithm names.
                "toUpperCase" => Ok(Val::Str(s.to_uppercase())),
                "toLowerCase" => Ok(Val::Str(s.to_lowercase())),
                "trim" => Ok(Val::Str(s.trim().to_string())),
                // Byte adapters preserve the value identity we track.
                "getBytes" => Ok(Val::Str(s)),
                "replace" => {
                    let args = self.argument_nodes(node)?;
                    let [from, to] = args[..] else {
                        return Err(unsupported("replace arity"));
                    };
                    let (Val::Str(from), Val::Str(to)) = (self.eval(from)?, self.eval(to)?)
                    else {
                        return Err(unsupported("replace arguments"));
                    };
                    Ok(Val::Str(s.replace(&from, &to)))
                }
                other => Err(unsupported(&format!("String method `{other}`"))),
            },
            Val::Obj { class, mut fields } => {
                let def = self
                    .defs
                    .get(&class)
                    .ok_or_else(|| unsupported("object of unknown helper"))?;
                match def.methods.get(name) {
                    Some(MethodDef::Chain(assigns)) => {
                        for (field_name, value) in assigns {
                            fields.insert(field_name.clone(), value.clone());
                        }
                        Ok(Val::Obj { class, fields })
                    }
                    Some(MethodDef::Getter(field_name)) => fields
                        .get(field_name)
                        .cloned()
                        .map(Val::Str)
                        .ok_or_else(|| unsupported("getter of unset field")),
                    None => Err(unsupported(&format!("helper method `{name}`"))),
                }
            }
            Val::DateNow => match name {
                "toString" => Ok(Val::Str(SYSTEM_TIME_SYMBOL.to_string())),
                other => Err(unsupported(&format!("Date method `{other}`"))),
            },
        }
    }

    fn eval_creation(&self, node: Node) -> Result<Val> {
        let type_name = self.text(field(node, "type")?);
        if type_name == "Date" {
            let args = field(node, "arguments")?;
            if self.squashed(args) == "(System.currentTimeMillis())" {
                return Ok(Val::DateNow);
            }
            return Err(unsupported("Date constructed from a non-clock source"));
        }
        if let Some(def) = self.defs.get(type_name) {
            return Ok(Val::Obj {
                class: type_name.to_string(),
                fields: def.field_inits.clone(),
            });
        }
        Err(unsupported(&format!("constructor of `{type_name}`")))
    }

    fn argument_nodes<'t>(&self, call: Node<'t>) -> Result<Vec<Node<'t>>> {
        let args = field(call, "arguments")?;
        let mut cursor = args.walk();
        Ok(args.named_children(&mut cursor).collect())
    }

    /// The first argument of the final call that evaluates to a string,
    /// after unwrapping a trailing `.getBytes()` adapter.
    fn first_string_argument(&self, call: Node) -> Result<String> {
        for arg in self.argument_nodes(call)? {
            if let Ok(Val::Str(s)) = self.eval(arg) {
                return Ok(s);
            }
        }
        Err(unsupported("no string-valued argument on the final call"))
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::api_model::ApiModel;
    use crate::mutation::{apply_operator, base_instantiation, OperatorConfig};
    use crate::taxonomy::Registry;

    fn snippet(statements: &[&str]) -> Snippet {
        Snippet {
            helper_declarations: Vec::new(),
            statements: statements.iter().map(|s| s.to_string()).collect(),
            declaration: None,
        }
    }

    #[test]
    fn literal_argument() {
        assert_eq!(
            effective_value_oracle(&snippet(&["Cipher.getInstance(\"DES\");"])).unwrap(),
            "DES"
        );
    }

    #[test]
    fn variable_indirection_and_concat() {
        assert_eq!(
            effective_value_oracle(&snippet(&[
                "String value = \"D\" + \"ES\";",
                "Cipher.getInstance(value);"
            ]))
            .unwrap(),
            "DES"
        );
    }

    #[test]
    fn case_and_replace_transforms() {
        assert_eq!(
            effective_value_oracle(&snippet(&[
                "Cipher.getInstance(\"des\".toUpperCase(Locale.English));"
            ]))
            .unwrap(),
            "DES"
        );
        assert_eq!(
            effective_value_oracle(&snippet(&[
                "Cipher.getInstance(\"DE$S\".replace(\"$\", \"\"));"
            ]))
            .unwrap(),
            "DES"
        );
        assert_eq!(
            effective_value_oracle(&snippet(&[
                "Cipher.getInstance(\"AES\".replace(\"A\", \"D\"));"
            ]))
            .unwrap(),
            "DES"
        );
    }

    #[test]
    fn char_range_loop_rebuilds_value() {
        assert_eq!(
            effective_value_oracle(&snippet(&[
                "String v = \"\";",
                "for (int i = 65; i < 75; i++) {\n    v += (char) i;\n}",
                "new IvParameterSpec(v.getBytes(), 0, 8);"
            ]))
            .unwrap(),
            "ABCDEFGHIJ"
        );
    }

    #[test]
    fn system_time_is_symbolic() {
        assert_eq!(
            effective_value_oracle(&snippet(&[
                "String val = new Date(System.currentTimeMillis()).toString();",
                "new IvParameterSpec(val.getBytes(), 0, 8);"
            ]))
            .unwrap(),
            SYSTEM_TIME_SYMBOL
        );
    }

    #[test]
    fn fluent_helper_chain() {
        let s = Snippet {
            helper_declarations: vec![
                "class MascHelper1 {\n    String algo = \"AES/CBC/PKCS5Padding\";\n    MascHelper1 mthd1() {\n        algo = \"AES\";\n        return this;\n    }\n    MascHelper1 mthd2() {\n        algo = \"DES\";\n        return this;\n    }\n    String getValue() {\n        return algo;\n    }\n}".into(),
            ],
            statements: vec![
                "Cipher.getInstance(new MascHelper1().mthd1().mthd2().getValue());".into(),
            ],
            declaration: None,
        };
        assert_eq!(effective_value_oracle(&s).unwrap(), "DES");
    }

    #[test]
    fn strictness_on_unknown_constructs() {
        for bad in [
            vec!["Cipher.getInstance(readFromDisk());"],
            vec!["Cipher.getInstance(value);"],
            vec!["String x = \"A\";"],
            vec!["Cipher.getInstance(\"A\".substring(0));"],
        ] {
            let result = effective_value_oracle(&snippet(&bad));
            assert!(
                matches!(result, Err(Error::UnsupportedExpression(_))),
                "{bad:?} gave {result:?}"
            );
        }
    }

    #[test]
    fn oracle_agrees_with_every_generated_restrictive_mutant() {
        let registry = Registry::bundled();
        let model = ApiModel::bundled();
        let config = OperatorConfig::for_registry(registry);
        let mut checked = 0usize;
        for case in registry.selected_cases() {
            if !case.insecure_arguments.is_empty() {
                let base = base_instantiation(case, model).unwrap();
                assert_eq!(
                    effective_value_oracle(&base.snippet).unwrap(),
                    base.effective_value.clone().unwrap(),
                    "{}",
                    base.id
                );
                checked += 1;
            }
            for op in case.applicable_operators.iter().filter(|o| o.is_restrictive()) {
                for mutant in apply_operator(case, *op, model, &config).unwrap() {
                    assert_eq!(
                        effective_value_oracle(&mutant.snippet).unwrap(),
                        mutant.effective_value.clone().unwrap(),
                        "{}",
                        mutant.id
                    );
                    checked += 1;
                }
            }
        }
        assert!(checked > 50, "only {checked} restrictive mutants checked");
    }
}
