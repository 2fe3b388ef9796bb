mod common;

use std::collections::VecDeque;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use common::*;
use planloop::geometry::{PathCandidate, Point};
use planloop::hints::{compute_hints, HintStrategy, RenderSettings};
use planloop::llm::client::{build_request, Backoff, HttpRequest, HttpResponse, Transport, TransportError};
use planloop::llm::parse::{parse_response, ParseError};
use planloop::llm::prompt::{describe_problem, feedback_prompt, initial_prompt, problem_from_description};
use planloop::llm::{Agent, AgentConfig, ChatClient, ChatMessage, LlmError, Provider, ScriptPolicy, ScriptedAgent};
use planloop::number::ratio;
use planloop::problems::{generate_random, handcrafted_suite, suite_problem, GeneratorConfig};
use proptest::prelude::*;
use serde_json::json;

/// Replays canned outcomes and records every request it receives.
struct MockTransport {
    replies: Mutex<VecDeque<Result<HttpResponse, TransportError>>>,
    seen: Mutex<Vec<HttpRequest>>,
}

impl MockTransport {
    fn new(replies: Vec<Result<HttpResponse, TransportError>>) -> Arc<Self> {
        Arc::new(Self { replies: Mutex::new(replies.into()), seen: Mutex::new(Vec::new()) })
    }

    fn calls(&self) -> usize {
        self.seen.lock().unwrap().len()
    }
}

impl Transport for MockTransport {
    fn post(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        self.seen.lock().unwrap().push(request.clone());
        self.replies
            .lock()
            .unwrap()
            .pop_front()
            .unwrap_or(Err(TransportError::Connection("no more replies".into())))
    }
}

fn status(code: u16, body: &str) -> Result<HttpResponse, TransportError> {
    Ok(HttpResponse { status: code, body: body.to_string() })
}

fn openai_ok(text: &str) -> Result<HttpResponse, TransportError> {
    status(200, &json!({"choices": [{"message": {"role": "assistant", "content": text}}]}).to_string())
}

fn client(provider: Provider, transport: Arc<MockTransport>) -> ChatClient {
    let var = provider.credential_var().unwrap();
    ChatClient::new(AgentConfig::new(provider, "m"), transport, |k| (k == var).then(|| "secret".to_string()))
        .unwrap()
        .with_backoff(Backoff::none())
}

fn conversation() -> Vec<ChatMessage> {
    vec![ChatMessage::system("sys"), ChatMessage::user("hello")]
}

#[test]
fn transient_failures_are_retried() {
    let transport = MockTransport::new(vec![status(500, "oops"), Err(TransportError::Timeout), openai_ok("[[1,1]]")]);
    let c = client(Provider::Gpt4o, transport.clone());
    assert_eq!(c.complete(&conversation()).unwrap(), "[[1,1]]");
    assert_eq!(transport.calls(), 3);
}

#[test]
fn retries_stop_after_the_budget() {
    let transport = MockTransport::new(vec![status(429, ""), status(429, ""), status(429, ""), status(429, "")]);
    let c = client(Provider::Gpt4o, transport.clone());
    assert_eq!(c.complete(&conversation()), Err(LlmError::RateLimited(4)));
    assert_eq!(transport.calls(), 4);

    let transport = MockTransport::new(vec![Err(TransportError::Timeout); 4]);
    assert_eq!(client(Provider::Claude, transport).complete(&conversation()), Err(LlmError::Timeout));
}

#[test]
fn authentication_failures_are_not_retried() {
    for code in [401, 403] {
        let transport = MockTransport::new(vec![status(code, "denied"), openai_ok("unused")]);
        let c = client(Provider::Gpt4o, transport.clone());
        assert!(matches!(c.complete(&conversation()), Err(LlmError::AuthError(_))));
        assert_eq!(transport.calls(), 1);
    }
    let transport = MockTransport::new(vec![status(400, "bad request")]);
    assert!(matches!(
        client(Provider::Gemini, transport).complete(&conversation()),
        Err(LlmError::ProviderError { status: 400, .. })
    ));
}

#[test]
fn missing_credentials_fail_before_any_request() {
    let transport = MockTransport::new(vec![]);
    for provider in [Provider::Gemini, Provider::Gpt4o, Provider::Claude] {
        let result = ChatClient::new(AgentConfig::new(provider, "m"), transport.clone(), |_| None);
        assert!(matches!(result, Err(LlmError::AuthError(msg)) if msg.contains(provider.credential_var().unwrap())));
        let blank = ChatClient::new(AgentConfig::new(provider, "m"), transport.clone(), |_| Some("  ".into()));
        assert!(matches!(blank, Err(LlmError::AuthError(_))));
    }
    assert_eq!(transport.calls(), 0);
}

#[test]
fn credential_variables_are_fixed() {
    assert_eq!(Provider::Gemini.credential_var(), Some("GEMINI_API_KEY"));
    assert_eq!(Provider::Gpt4o.credential_var(), Some("OPENAI_API_KEY"));
    assert_eq!(Provider::Claude.credential_var(), Some("ANTHROPIC_API_KEY"));
    assert_eq!(Provider::Scripted.credential_var(), None);
}

#[test]
fn request_shapes_per_provider() {
    let problem = suite_problem("Wall").unwrap();
    let mut messages = initial_prompt(&problem, &HintStrategy::cfpi(), &RenderSettings::default());
    messages.push(ChatMessage::assistant("[[1,1]]"));
    let png = messages[1].image.as_ref().unwrap().pixels.clone();
    use base64::Engine;
    let b64 = base64::engine::general_purpose::STANDARD.encode(&png);

    let openai = build_request(&AgentConfig::new(Provider::Gpt4o, "gpt-4o"), "k", &messages);
    assert!(openai.url.ends_with("/v1/chat/completions"));
    assert!(openai.headers.contains(&("Authorization".into(), "Bearer k".into())));
    assert_eq!(openai.body["messages"].as_array().unwrap().len(), 3);
    assert_eq!(openai.body["messages"][1]["content"][1]["image_url"]["url"], format!("data:image/png;base64,{b64}"));
    assert!(openai.body.get("temperature").is_none());

    let anthropic = build_request(&AgentConfig::new(Provider::Claude, "c"), "k", &messages);
    assert!(anthropic.url.ends_with("/v1/messages"));
    assert!(anthropic.headers.contains(&("x-api-key".into(), "k".into())));
    assert_eq!(anthropic.body["system"], messages[0].text);
    assert_eq!(anthropic.body["messages"].as_array().unwrap().len(), 2);
    assert_eq!(anthropic.body["messages"][0]["content"][1]["source"]["data"], b64);
    assert!(anthropic.body.get("temperature").is_none());

    let mut config = AgentConfig::new(Provider::Gemini, "g");
    config.temperature = Some(0.25);
    config.base_url = Some("http://localhost:9/".into());
    let gemini = build_request(&config, "k", &messages);
    assert_eq!(gemini.url, "http://localhost:9/v1beta/models/g:generateContent?key=k");
    assert_eq!(gemini.body["generationConfig"]["temperature"], 0.25);
    assert_eq!(gemini.body["contents"][1]["role"], "model");
    assert_eq!(gemini.body["contents"][0]["parts"][1]["inline_data"]["data"], b64);
    assert_eq!(gemini.body["systemInstruction"]["parts"][0]["text"], messages[0].text);
}

#[test]
fn responses_are_extracted_per_provider() {
    let claude = status(200, &json!({"content": [{"type": "text", "text": "a"}, {"type": "text", "text": "b"}]}).to_string());
    assert_eq!(client(Provider::Claude, MockTransport::new(vec![claude])).complete(&conversation()).unwrap(), "ab");
    let gemini = status(200, &json!({"candidates": [{"content": {"parts": [{"text": "[[2,2]]"}]}}]}).to_string());
    assert_eq!(client(Provider::Gemini, MockTransport::new(vec![gemini])).complete(&conversation()).unwrap(), "[[2,2]]");
    let garbage = status(200, "not json");
    assert!(matches!(
        client(Provider::Gemini, MockTransport::new(vec![garbage])).complete(&conversation()),
        Err(LlmError::ProviderError { status: 200, .. })
    ));
}

#[test]
fn agent_specs_parse() {
    let c = AgentConfig::parse("gpt4o:gpt-4o-2024-08-06").unwrap();
    assert_eq!((c.provider, c.model_id.as_str()), (Provider::Gpt4o, "gpt-4o-2024-08-06"));
    assert_eq!(AgentConfig::parse("claude").unwrap().model_id, Provider::Claude.default_model());
    assert!(AgentConfig::parse("nobody:x").is_err());
    assert!(AgentConfig::parse("gemini:").is_err());
    assert_eq!(ScriptPolicy::parse("random-walk(7)"), Ok(ScriptPolicy::RandomWalk(7)));
    assert!(ScriptPolicy::parse("dance").is_err());
}

fn arb_decimal() -> impl Strategy<Value = (String, planloop::number::Scalar)> {
    (-10_000i64..10_000, 0u32..=6).prop_map(|(n, d)| {
        let q = ratio(n, 10i64.pow(d));
        let text = if d == 0 {
            n.to_string()
        } else {
            let sign = if n < 0 { "-" } else { "" };
            let a = n.unsigned_abs();
            let p = 10u64.pow(d);
            format!("{sign}{}.{:0width$}", a / p, a % p, width = d as usize)
        };
        (text, q)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn parse_round_trips_canonical_paths(pts in prop::collection::vec((-100_000i64..100_000, -100_000i64..100_000), 1..8)) {
        let path = PathCandidate::new(pts.into_iter().map(|(x, y)| Point::new(ratio(x, 1000), ratio(y, 1000))).collect());
        let text = format!("Let me think.\nFirst go right, then up.\n{}", path.to_array_string());
        prop_assert_eq!(parse_response(&text).unwrap().path(), path);
    }

    #[test]
    fn parse_accepts_loose_formatting(
        pts in prop::collection::vec((arb_decimal(), arb_decimal()), 1..6),
        parens in any::<bool>(),
        pad in "[ \n\t]{0,3}",
    ) {
        let (open, close) = if parens { ("(", ")") } else { ("[", "]") };
        let body: Vec<String> = pts.iter().map(|((x, _), (y, _))| format!("{open}{pad}{x},{pad}{y}{pad}{close}")).collect();
        let text = format!("Answer:\n```\n[{pad}{}{pad}]\n```\nDone.", body.join(&format!(",{pad}")));
        let parsed = parse_response(&text).unwrap();
        let expected: Vec<Point> = pts.into_iter().map(|((_, x), (_, y))| Point::new(x, y)).collect();
        prop_assert_eq!(parsed.waypoints, expected);
        prop_assert_eq!(parsed.raw_text, text);
    }

    #[test]
    fn prose_without_arrays_is_no_path(text in "[a-zA-Z0-9 ,.;:!?\n]{0,200}") {
        prop_assert_eq!(parse_response(&text), Err(ParseError::NoPathFound));
    }
}

#[test]
fn last_of_several_arrays_wins() {
    let text = "Draft: [[0, 0], [1, 1]]\nFinal: [[0.5, 0.5], [9, 9]]";
    assert_eq!(parse_response(text).unwrap().waypoints, vec![hp(50, 50), Point::from_ints(9, 9)]);
}

#[test]
fn problem_descriptions_round_trip() {
    for problem in handcrafted_suite()
        .into_iter()
        .chain((0..10).map(|s| generate_random(&GeneratorConfig::new(5, s)).unwrap()))
    {
        let text = describe_problem(&problem);
        assert_eq!(text, describe_problem(&problem));
        let back = problem_from_description(&text).unwrap();
        assert_eq!(back.workspace, problem.workspace);
        assert_eq!(back.initial, problem.initial);
        assert_eq!(back.goal, problem.goal);
        assert_eq!(back.obstacles, problem.obstacles);
    }
}

#[test]
fn prompts_are_deterministic() {
    let problem = suite_problem("Maze").unwrap();
    let settings = RenderSettings::default();
    assert_eq!(
        initial_prompt(&problem, &HintStrategy::cfpi(), &settings),
        initial_prompt(&problem, &HintStrategy::cfpi(), &settings)
    );
    let path = PathCandidate::new(vec![Point::from_ints(1, 1), Point::from_ints(1, 9)]);
    let bundle = compute_hints(&problem, &path, &HintStrategy::cfp(), &settings).unwrap();
    let a = feedback_prompt(&bundle).unwrap();
    assert_eq!(a, feedback_prompt(&bundle).unwrap());
    assert!(a.text.starts_with("Your path is incorrect."));
    assert!(a.text.contains("These points are in free space:"));
    assert!(a.text.contains("Your path is correct up to and including waypoint"));
}

#[test]
fn scripted_policies_answer_in_canonical_syntax() {
    let problem = suite_problem("Wall").unwrap();
    let messages = initial_prompt(&problem, &HintStrategy::cfp(), &RenderSettings::default());

    let mut oracle = ScriptedAgent::new(ScriptPolicy::Oracle);
    let path = parse_response(&oracle.respond(&messages).unwrap()).unwrap().path();
    assert!(planloop::verify_path(&problem, &path).unwrap().is_correct);

    let mut echo = ScriptedAgent::new(ScriptPolicy::EchoFixedPath(None));
    let straight = parse_response(&echo.respond(&messages).unwrap()).unwrap().path();
    assert_eq!(straight.waypoints(), [problem.initial.center(), problem.goal.center()]);

    let walk = |seed| ScriptedAgent::new(ScriptPolicy::RandomWalk(seed)).respond(&messages).unwrap();
    assert_eq!(walk(3), walk(3));

    let mut queued = ScriptedAgent::new(ScriptPolicy::Queued(vec!["one".into()]));
    assert_eq!(queued.respond(&messages).unwrap(), "one");
    assert!(matches!(queued.respond(&messages), Err(LlmError::Script(_))));
    assert_eq!(queued.summary().provider, Provider::Scripted);
}

#[test]
fn timeouts_are_carried_into_requests() {
    let mut config = AgentConfig::new(Provider::Gpt4o, "m");
    config.timeout = Duration::from_secs(7);
    assert_eq!(build_request(&config, "k", &conversation()).timeout, Duration::from_secs(7));
    config.timeout = Duration::ZERO;
    assert!(ChatClient::new(config, MockTransport::new(vec![]), |_| Some("k".into())).is_err());
}
