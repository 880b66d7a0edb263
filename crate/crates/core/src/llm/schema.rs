use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    String,
    /// String or null; may be omitted.
    OptionalString,
    /// Non-negative integer.
    Index,
    Number,
    StringList,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSpec {
    pub name: &'static str,
    pub kind: FieldKind,
}

impl FieldSpec {
    pub const fn new(name: &'static str, kind: FieldKind) -> Self {
        Self { name, kind }
    }
}

/// Shape of a structured response: an object whose single list field holds
/// uniform item objects, e.g. `{"edges": [{"source": ..., ...}]}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuredSchema {
    pub name: &'static str,
    pub list_field: &'static str,
    pub item_fields: Vec<FieldSpec>,
}

impl StructuredSchema {
    /// Example document shown to the model.
    pub fn describe(&self) -> String {
        let fields: Vec<String> = self
            .item_fields
            .iter()
            .map(|f| {
                let ty = match f.kind {
                    FieldKind::String => "\"<string>\"",
                    FieldKind::OptionalString => "\"<string>\" or null",
                    FieldKind::Index => "<non-negative integer>",
                    FieldKind::Number => "<number>",
                    FieldKind::StringList => "[\"<string>\", ...]",
                };
                format!("\"{}\": {}", f.name, ty)
            })
            .collect();
        format!(
            "{{\"{}\": [{{{}}}, ...]}}",
            self.list_field,
            fields.join(", ")
        )
    }

    /// Checks `value` against the schema, listing every problem found.
    pub fn validate(&self, value: &Value) -> Result<(), Vec<String>> {
        let Some(root) = value.as_object() else {
            return Err(vec!["top level: expected a JSON object".into()]);
        };
        let Some(items) = root.get(self.list_field) else {
            return Err(vec![format!("missing field {:?}", self.list_field)]);
        };
        let Some(items) = items.as_array() else {
            return Err(vec![format!("{}: expected an array", self.list_field)]);
        };
        let mut problems = Vec::new();
        for (i, item) in items.iter().enumerate() {
            let at = format!("{}[{i}]", self.list_field);
            match item.as_object() {
                Some(obj) => self.check_item(obj, &at, &mut problems),
                None => problems.push(format!("{at}: expected an object")),
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems)
        }
    }

    fn check_item(&self, obj: &Map<String, Value>, at: &str, problems: &mut Vec<String>) {
        for field in &self.item_fields {
            let v = obj.get(field.name);
            let ok = match (field.kind, v) {
                (FieldKind::OptionalString, None | Some(Value::Null)) => true,
                (_, None) => {
                    problems.push(format!("{at}.{}: missing", field.name));
                    continue;
                }
                (FieldKind::String | FieldKind::OptionalString, Some(v)) => v.is_string(),
                (FieldKind::Index, Some(v)) => v.as_u64().is_some(),
                (FieldKind::Number, Some(v)) => v.as_f64().map(f64::is_finite).unwrap_or(false),
                (FieldKind::StringList, Some(v)) => v
                    .as_array()
                    .map(|a| a.iter().all(Value::is_string))
                    .unwrap_or(false),
            };
            if !ok {
                let expected = match field.kind {
                    FieldKind::String => "a string",
                    FieldKind::OptionalString => "a string or null",
                    FieldKind::Index => "a non-negative integer",
                    FieldKind::Number => "a finite number",
                    FieldKind::StringList => "an array of strings",
                };
                problems.push(format!("{at}.{}: expected {expected}", field.name));
            }
        }
    }
}

/// Pulls the JSON document out of a model response, tolerating markdown
/// fences and surrounding prose.
pub fn extract_json(text: &str) -> Result<Value, String> {
    let trimmed = text.trim();
    if let Ok(v) = serde_json::from_str(trimmed) {
        return Ok(v);
    }
    let start = trimmed.find('{');
    let end = trimmed.rfind('}');
    match (start, end) {
        (Some(s), Some(e)) if s < e => serde_json::from_str(&trimmed[s..=e])
            .map_err(|err| format!("response is not valid JSON: {err}")),
        _ => Err("response contains no JSON object".into()),
    }
}
