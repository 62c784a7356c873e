use std::sync::OnceLock;

use minijinja::syntax::SyntaxConfig;
use minijinja::value::Serde;
use minijinja::{context, AutoEscape, Environment, Value};
use serde::Serialize;

use super::ChatMessage;
use crate::ie_stage::FieldQuery;
use crate::programmer_stage::EvaluationFeedback;
use crate::text::json_list;

const IE_PROMPT: &str = include_str!("../../templates/ie_prompt.txt");
const PROGRAM_SYSTEM: &str = include_str!("../../templates/program_system.txt");
const PROGRAM_USER: &str = include_str!("../../templates/program_user.txt");
const FEEDBACK_PROMPT: &str = include_str!("../../templates/feedback_prompt.txt");

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum PromptError {
    #[error("feedback prompt needs at least one evaluation")]
    EmptyFeedback,
}

fn env() -> &'static Environment<'static> {
    static ENV: OnceLock<Environment<'static>> = OnceLock::new();
    ENV.get_or_init(|| {
        let mut env = Environment::new();
        env.set_syntax(
            SyntaxConfig::builder()
                .trim_blocks(true)
                .build()
                .expect("default delimiters"),
        );
        env.set_auto_escape_callback(|_| AutoEscape::None);
        env.add_template("ie", IE_PROMPT).expect("ie template");
        env.add_template("program_user", PROGRAM_USER)
            .expect("program template");
        env.add_template("feedback", FEEDBACK_PROMPT)
            .expect("feedback template");
        env
    })
}

fn render(name: &str, ctx: Value) -> String {
    env()
        .get_template(name)
        .and_then(|t| t.render(ctx))
        .unwrap_or_else(|e| panic!("bundled template {name} failed to render: {e}"))
}

pub fn render_ie_prompt(query: &str, context: &str, json_example: &str) -> String {
    render(
        "ie",
        context! { query => query, context => context, json_example => json_example },
    )
}

/// `{"<field>": {"value": [""], "cue_text": ""}, ...}` in query order.
pub fn json_example(queries: &[FieldQuery]) -> String {
    let parts: Vec<String> = queries
        .iter()
        .map(|q| {
            format!(
                r#"{}: {{"value": [""], "cue_text": ""}}"#,
                serde_json::to_string(&q.name).expect("string serializes")
            )
        })
        .collect();
    format!("{{{}}}", parts.join(", "))
}

pub fn program_system_prompt() -> &'static str {
    PROGRAM_SYSTEM.strip_suffix('\n').unwrap_or(PROGRAM_SYSTEM)
}

#[derive(Serialize)]
struct PageView<'a> {
    id: &'a str,
    html: &'a str,
}

pub fn render_program_prompts(
    condensed_pages: &[(String, String)],
    field: &str,
    targets: &[String],
    cue: &str,
    static_xpaths: &[String],
) -> Vec<ChatMessage> {
    let pages: Vec<PageView> = condensed_pages
        .iter()
        .map(|(id, html)| PageView { id, html })
        .collect();
    let user = render(
        "program_user",
        context! {
            field => field,
            pages => Value::from(Serde(&pages)),
            targets => json_list(targets),
            cue => cue,
            static_xpaths => Value::from(Serde(static_xpaths)),
        },
    );
    vec![
        ChatMessage::system(program_system_prompt()),
        ChatMessage::user(user),
    ]
}

#[derive(Serialize)]
struct FeedbackView<'a> {
    id: &'a str,
    extracted: String,
    message: &'a str,
}

pub fn render_feedback_prompt(feedbacks: &[EvaluationFeedback]) -> Result<String, PromptError> {
    if feedbacks.is_empty() {
        return Err(PromptError::EmptyFeedback);
    }
    let views: Vec<FeedbackView> = feedbacks
        .iter()
        .map(|f| FeedbackView {
            id: &f.page_id,
            extracted: json_list(&f.extracted),
            message: &f.message,
        })
        .collect();
    Ok(render(
        "feedback",
        context! { feedbacks => Value::from(Serde(&views)) },
    ))
}
