mod common;

use std::time::Duration;

use axum::http::StatusCode;
use common::{config, get, post_json, router, router_with, upload, upload_text};
use embias::numerics::{pca_2d, Matrix};
use embias::store::{load_text, vectors_bytes};
use serde_json::{json, Value};

const TWO_WORDS: &str = "2 3\nalpha 1 0 0\nbeta 0 1 0\n";

#[tokio::test]
async fn fresh_server_lists_only_builtins() {
    let app = router();
    let spaces = get(&app, "/api/spaces").await.json();
    let spaces = spaces.as_array().unwrap();
    assert_eq!(spaces.len(), 1);
    assert_eq!(spaces[0]["id"], "builtin-toy");
    assert_eq!(spaces[0]["origin"], "builtin");

    let on_disk = load_text(common::data_dir().join("spaces/toy.vec"), None).unwrap();
    assert_eq!(spaces[0]["dim"], on_disk.dim());
    assert_eq!(spaces[0]["vocab_size"], on_disk.len());
}

#[tokio::test]
async fn upload_adds_one_handle() {
    let app = router();
    let reply = upload_text(&app, "two.vec", TWO_WORDS).await;
    assert_eq!(reply.status, StatusCode::CREATED, "{}", reply.text());
    let handle = reply.json();
    assert_eq!(handle["vocab_size"], 2);
    assert_eq!(handle["dim"], 3);
    assert_eq!(handle["name"], "two");
    assert_eq!(handle["origin"], "uploaded");

    let spaces = get(&app, "/api/spaces").await.json();
    assert_eq!(spaces.as_array().unwrap().len(), 2);
    let fetched = get(&app, &format!("/api/spaces/{}", handle["id"].as_str().unwrap())).await;
    assert_eq!(fetched.json(), handle);
}

#[tokio::test]
async fn malformed_line_reports_its_number() {
    let app = router();
    let reply = upload_text(&app, "bad.vec", "alpha 1 0 0\nbeta 0 1 0\ngamma 0 x 1\n").await;
    assert_eq!(reply.status, StatusCode::BAD_REQUEST);
    let body = reply.json();
    assert_eq!(body["error"]["code"], "parse_error");
    assert!(body["error"]["message"].as_str().unwrap().contains("line 3"), "{body}");
}

#[tokio::test]
async fn oversized_upload_is_rejected() {
    let app = router_with(embias_server::Config {
        upload_cap: 1024,
        ..config()
    });
    let big: String = (0..200).map(|i| format!("w{i} 0.5 0.25 0.125\n")).collect();
    let reply = upload_text(&app, "big.vec", &big).await;
    assert_eq!(reply.status, StatusCode::PAYLOAD_TOO_LARGE, "{}", reply.text());
    assert_eq!(reply.json()["error"]["code"], "payload_too_large");
}

#[tokio::test]
async fn vector_lookup_preserves_order() {
    let app = router();
    let reply = get(&app, "/api/spaces/builtin-toy/vectors?words=man,xyzzy").await.json();
    let entries = reply.as_array().unwrap();
    assert_eq!(entries.len(), 2);
    assert_eq!(entries[0]["word"], "man");
    assert_eq!(entries[0]["found"], true);
    assert_eq!(entries[0]["vector"].as_array().unwrap().len(), 25);
    assert_eq!(entries[1]["found"], false);

    let missing = get(&app, "/api/spaces/unknown/vectors?words=man").await;
    assert_eq!(missing.status, StatusCode::NOT_FOUND);
    assert_eq!(missing.json()["error"]["code"], "not_found");
}

#[tokio::test]
async fn binary_export_round_trips() {
    let app = router();
    let debiased = post_json(
        &app,
        "/api/debias",
        &json!({"space_id": "builtin-toy", "spec": "weat7", "method": "gbdd", "return": "handle"}),
    )
    .await;
    assert_eq!(debiased.status, StatusCode::CREATED, "{}", debiased.text());
    let body = debiased.json();
    assert_eq!(body["space"]["dim"], 25);
    let id = body["space"]["id"].as_str().unwrap();

    let vectors = get(&app, &format!("/api/spaces/{id}/export?format=binary")).await;
    let vocab = get(&app, &format!("/api/spaces/{id}/export?format=binary&part=vocab")).await;
    assert_eq!(vectors.status, StatusCode::OK);
    let reply = upload(
        &app,
        &[
            ("vocab", Some("again.vocab"), &vocab.body),
            ("vectors", Some("again.vectors"), &vectors.body),
        ],
    )
    .await;
    assert_eq!(reply.status, StatusCode::CREATED, "{}", reply.text());
    let again = reply.json()["id"].as_str().unwrap().to_string();
    let second = get(&app, &format!("/api/spaces/{again}/export?format=binary")).await;
    assert_eq!(second.body, vectors.body);

    let text = get(&app, &format!("/api/spaces/{id}/export?format=text")).await;
    assert!(text.text().lines().count() > 500);
}

#[tokio::test]
async fn debias_download_returns_text_space() {
    let app = router();
    let reply = post_json(
        &app,
        "/api/debias",
        &json!({"space_id": "builtin-toy", "spec": "weat7", "method": "gbdd-bam", "return": "download"}),
    )
    .await;
    assert_eq!(reply.status, StatusCode::OK);
    let meta: Value = serde_json::from_str(reply.headers["x-debias-metadata"].to_str().unwrap()).unwrap();
    assert_eq!(meta["method"], "gbdd-bam");
    assert_eq!(meta["stages"].as_array().unwrap().len(), 2);
    let space = embias::store::read_text(std::io::Cursor::new(&reply.body[..]), "d", "download", None).unwrap();
    assert_eq!(space.len(), 513);
}

#[tokio::test]
async fn unsupported_method_is_bad_request() {
    let app = router();
    let reply = post_json(
        &app,
        "/api/debias",
        &json!({"space_id": "builtin-toy", "spec": "weat7", "method": "hard-debias"}),
    )
    .await;
    assert_eq!(reply.status, StatusCode::BAD_REQUEST);
    assert_eq!(reply.json()["error"]["code"], "invalid_method");
}

#[tokio::test]
async fn degenerate_spec_warns() {
    let app = router();
    let reply = post_json(
        &app,
        "/api/debias",
        &json!({"space_id": "builtin-toy", "spec": {"t1": ["man"], "t2": ["man"]}, "method": "gbdd"}),
    )
    .await;
    assert_eq!(reply.status, StatusCode::CREATED, "{}", reply.text());
    let meta = &reply.json()["metadata"];
    assert_eq!(meta["stages"][0]["degenerate"], true);
    assert_eq!(meta["warnings"].as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn same_seed_gives_identical_bytes() {
    let app = router();
    let req = json!({"space_id": "builtin-toy", "spec": "weat2", "metrics": ["weat", "ibt"], "options": {"seed": 9, "n_permutations": 3000}});
    let a = post_json(&app, "/api/evaluate", &req).await;
    let b = post_json(&app, "/api/evaluate", &req).await;
    assert_eq!(a.status, StatusCode::OK);
    assert_eq!(a.body, b.body);
}

#[tokio::test]
async fn concurrent_evaluations_match_serial() {
    let app = router();
    let req = json!({"space_id": "builtin-toy", "spec": "weat1", "metrics": ["weat", "ect", "bat"], "options": {"n_permutations": 1000}});
    let serial = post_json(&app, "/api/evaluate", &req).await.body;
    let mut tasks = Vec::new();
    for _ in 0..6 {
        let app = app.clone();
        let req = req.clone();
        tasks.push(tokio::spawn(async move { post_json(&app, "/api/evaluate", &req).await.body }));
    }
    for t in tasks {
        assert_eq!(t.await.unwrap(), serial);
    }
}

async fn wait_for_job(app: &axum::Router, id: &str) -> Value {
    for _ in 0..400 {
        let job = get(app, &format!("/api/jobs/{id}")).await.json();
        if job["state"] == "done" || job["state"] == "failed" {
            return job;
        }
        tokio::time::sleep(Duration::from_millis(10)).await;
    }
    panic!("job {id} did not finish");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn large_debias_runs_as_job() {
    let app = router_with(embias_server::Config {
        async_rows: 10,
        ..config()
    });
    let reply = post_json(&app, "/api/debias", &json!({"space_id": "builtin-toy", "spec": "weat8", "method": "bam"})).await;
    assert_eq!(reply.status, StatusCode::ACCEPTED, "{}", reply.text());
    let job = reply.json();
    assert_eq!(job["kind"], "debias");
    let id = job["id"].as_str().unwrap();

    let done = wait_for_job(&app, id).await;
    assert_eq!(done["state"], "done", "{done}");
    // polling a finished job is idempotent
    assert_eq!(get(&app, &format!("/api/jobs/{id}")).await.json(), done);
    let space_id = done["result_ref"].as_str().unwrap();
    let handle = get(&app, &format!("/api/spaces/{space_id}")).await.json();
    assert_eq!(handle["name"], "toy-bam");
    let result = get(&app, &format!("/api/jobs/{id}/result")).await.json();
    assert_eq!(result["metadata"]["method"], "bam");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn async_evaluate_matches_sync() {
    let app = router();
    let req = json!({"space_id": "builtin-toy", "spec": "weat3", "metrics": ["weat"], "options": {"n_permutations": 500}});
    let sync = post_json(&app, "/api/evaluate", &req).await.body;
    let mut async_req = req.clone();
    async_req["async"] = json!(true);
    let job = post_json(&app, "/api/evaluate", &async_req).await;
    assert_eq!(job.status, StatusCode::ACCEPTED);
    let id = job.json()["id"].as_str().unwrap().to_string();
    assert_eq!(wait_for_job(&app, &id).await["state"], "done");
    assert_eq!(get(&app, &format!("/api/jobs/{id}/result")).await.body, sync);
}

#[tokio::test]
async fn implicit_spec_gives_labeled_points_matching_pca() {
    let app = router();
    let spec = json!({"t1": ["man", "boy"], "t2": ["woman", "girl"]});
    let view = post_json(&app, "/api/visualize", &json!({"space_id": "builtin-toy", "spec": spec})).await.json();
    let points = view["projections"][0]["points"].as_array().unwrap();
    assert_eq!(points.len(), 4);
    let sets: Vec<_> = points.iter().map(|p| p["set"].as_str().unwrap()).collect();
    assert_eq!(sets, ["t1", "t1", "t2", "t2"]);

    let lookup = get(&app, "/api/spaces/builtin-toy/vectors?words=man,boy,woman,girl").await.json();
    let rows: Vec<Vec<f64>> = lookup
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["vector"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect())
        .collect();
    let expected = pca_2d(&Matrix::from_rows(&rows).unwrap()).unwrap();
    for (i, p) in points.iter().enumerate() {
        assert_eq!(p["x"].as_f64().unwrap(), expected.get(i, 0));
        assert_eq!(p["y"].as_f64().unwrap(), expected.get(i, 1));
    }
}

#[tokio::test]
async fn both_spaces_share_term_order() {
    let app = router();
    let debiased = post_json(&app, "/api/debias", &json!({"space_id": "builtin-toy", "spec": "weat8", "method": "gbdd"})).await;
    let id = debiased.json()["space"]["id"].as_str().unwrap().to_string();
    let view = post_json(
        &app,
        "/api/visualize",
        &json!({"space_id": "builtin-toy", "debiased_space_id": id, "spec": "weat8"}),
    )
    .await
    .json();
    let projections = view["projections"].as_array().unwrap();
    assert_eq!(projections.len(), 2);
    let terms = |i: usize| -> Vec<String> {
        projections[i]["points"].as_array().unwrap().iter().map(|p| p["term"].as_str().unwrap().to_string()).collect()
    };
    assert_eq!(terms(0), terms(1));
    assert_eq!(projections[1]["space"], "toy-gbdd");
}

#[tokio::test]
async fn uploads_expire() {
    let app = router_with(embias_server::Config {
        ttl: Duration::from_millis(50),
        ..config()
    });
    let id = upload_text(&app, "two.vec", TWO_WORDS).await.json()["id"].as_str().unwrap().to_string();
    assert_eq!(get(&app, &format!("/api/spaces/{id}")).await.status, StatusCode::OK);
    tokio::time::sleep(Duration::from_millis(80)).await;
    assert_eq!(get(&app, &format!("/api/spaces/{id}")).await.status, StatusCode::NOT_FOUND);
    // builtin handles never expire
    assert_eq!(get(&app, "/api/spaces/builtin-toy").await.status, StatusCode::OK);
}

#[tokio::test]
async fn errors_are_structured() {
    let app = router();
    for reply in [
        get(&app, "/api/nothing-here").await,
        post_json(&app, "/api/evaluate", &json!({"spec": "weat1"})).await,
        post_json(&app, "/api/evaluate", &json!({"space_id": "builtin-toy", "spec": "weat99"})).await,
        get(&app, "/api/jobs/missing").await,
    ] {
        let body = reply.json();
        assert!(reply.status.is_client_error());
        assert!(body["error"]["code"].is_string() && body["error"]["message"].is_string(), "{body}");
    }
}

#[tokio::test]
async fn openapi_lists_every_route() {
    let doc = get(&router(), "/api/openapi").await.json();
    for path in [
        "/api/spaces",
        "/api/spaces/{id}/vectors",
        "/api/spaces/{id}/export",
        "/api/evaluate",
        "/api/debias",
        "/api/visualize",
        "/api/jobs/{id}",
    ] {
        assert!(doc["paths"][path].is_object(), "{path}");
    }
}

#[test]
fn uploaded_vectors_match_float32_export() {
    // the binary export stores f32; a round trip through it is lossless
    let space = load_text(common::data_dir().join("spaces/toy.vec"), None).unwrap();
    let bytes = vectors_bytes(&space);
    assert_eq!(bytes.len(), 20 + 4 * space.len() * space.dim());
}
