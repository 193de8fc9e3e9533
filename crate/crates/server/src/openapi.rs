//! Machine-readable description of the HTTP interface.

use serde_json::{json, Value};

fn error_response(description: &str) -> Value {
    json!({
        "description": description,
        "content": {"application/json": {"schema": {"$ref": "#/components/schemas/Error"}}}
    })
}

fn json_body(schema: &str) -> Value {
    json!({
        "required": true,
        "content": {"application/json": {"schema": {"$ref": format!("#/components/schemas/{schema}")}}}
    })
}

fn ok(description: &str, schema: Value) -> Value {
    json!({"description": description, "content": {"application/json": {"schema": schema}}})
}

fn schema_ref(name: &str) -> Value {
    json!({"$ref": format!("#/components/schemas/{name}")})
}

fn id_param(name: &str) -> Value {
    json!({"name": name, "in": "path", "required": true, "schema": {"type": "string"}})
}

pub fn document() -> Value {
    json!({
        "openapi": "3.0.3",
        "info": {
            "title": "embias",
            "version": env!("CARGO_PKG_VERSION"),
            "description": "Bias measurement and debiasing for word embedding spaces."
        },
        "paths": {
            "/api/spaces": {
                "get": {
                    "summary": "List bundled and uploaded spaces",
                    "responses": {"200": ok("Space handles", json!({"type": "array", "items": schema_ref("SpaceHandle")}))}
                },
                "post": {
                    "summary": "Upload a space",
                    "description": "Text format in a 'file' part, or binary format in 'vocab' and 'vectors' parts. An optional 'name' part names the space.",
                    "requestBody": {"required": true, "content": {"multipart/form-data": {"schema": {
                        "type": "object",
                        "properties": {
                            "name": {"type": "string"},
                            "file": {"type": "string", "format": "binary"},
                            "vocab": {"type": "string", "format": "binary"},
                            "vectors": {"type": "string", "format": "binary"}
                        }
                    }}}},
                    "responses": {
                        "201": ok("Registered space", schema_ref("SpaceHandle")),
                        "400": error_response("Unparseable upload; the message names the offending line"),
                        "413": error_response("Upload larger than the configured limit")
                    }
                }
            },
            "/api/spaces/{id}": {
                "get": {
                    "parameters": [id_param("id")],
                    "responses": {"200": ok("Space handle", schema_ref("SpaceHandle")), "404": error_response("Unknown or expired space")}
                }
            },
            "/api/spaces/{id}/vectors": {
                "get": {
                    "summary": "Look up word vectors",
                    "parameters": [id_param("id"), {"name": "words", "in": "query", "required": true, "description": "Comma-separated words", "schema": {"type": "string"}}],
                    "responses": {
                        "200": ok("One entry per requested word, in request order", json!({"type": "array", "items": schema_ref("LookupResult")})),
                        "404": error_response("Unknown or expired space")
                    }
                }
            },
            "/api/spaces/{id}/export": {
                "get": {
                    "summary": "Download a space",
                    "parameters": [
                        id_param("id"),
                        {"name": "format", "in": "query", "schema": {"type": "string", "enum": ["text", "binary"], "default": "text"}},
                        {"name": "part", "in": "query", "description": "Binary file to return", "schema": {"type": "string", "enum": ["vectors", "vocab"], "default": "vectors"}}
                    ],
                    "responses": {"200": {"description": "File contents"}, "404": error_response("Unknown or expired space")}
                }
            },
            "/api/specs": {
                "get": {"summary": "List builtin bias specifications", "responses": {"200": {"description": "Names and set sizes"}}}
            },
            "/api/evaluate": {
                "post": {
                    "summary": "Run bias and quality measures",
                    "requestBody": json_body("EvaluateRequest"),
                    "responses": {
                        "200": ok("Evaluation report", schema_ref("EvaluationReport")),
                        "202": ok("Job accepted (when async is true)", schema_ref("JobRecord")),
                        "400": error_response("Invalid spec or a metric the spec cannot support"),
                        "404": error_response("Unknown or expired space")
                    }
                }
            },
            "/api/debias": {
                "post": {
                    "summary": "Debias a space",
                    "requestBody": json_body("DebiasRequest"),
                    "responses": {
                        "201": ok("New space and method metadata", schema_ref("DebiasResponse")),
                        "200": {"description": "Debiased space in text format (return = download); metadata in the x-debias-metadata header"},
                        "202": ok("Job accepted for large spaces", schema_ref("JobRecord")),
                        "400": error_response("Unsupported method or invalid spec"),
                        "404": error_response("Unknown or expired space")
                    }
                }
            },
            "/api/visualize": {
                "post": {
                    "summary": "2D PCA projection of the specification terms",
                    "requestBody": json_body("VisualizeRequest"),
                    "responses": {
                        "200": ok("One projection per space", schema_ref("ProjectionView")),
                        "400": error_response("No specification term is in the vocabulary"),
                        "404": error_response("Unknown or expired space")
                    }
                }
            },
            "/api/jobs/{id}": {
                "get": {
                    "parameters": [id_param("id")],
                    "responses": {"200": ok("Job state", schema_ref("JobRecord")), "404": error_response("Unknown job")}
                }
            },
            "/api/jobs/{id}/result": {
                "get": {
                    "parameters": [id_param("id")],
                    "responses": {"200": {"description": "Result body of a finished job"}, "409": error_response("Job not finished")}
                }
            },
            "/api/openapi": {"get": {"summary": "This document", "responses": {"200": {"description": "OpenAPI document"}}}}
        },
        "components": {"schemas": {
            "Error": {"type": "object", "properties": {"error": {"type": "object", "properties": {
                "code": {"type": "string"}, "message": {"type": "string"}
            }}}},
            "SpaceHandle": {"type": "object", "properties": {
                "id": {"type": "string"},
                "name": {"type": "string"},
                "dim": {"type": "integer"},
                "vocab_size": {"type": "integer"},
                "origin": {"type": "string", "enum": ["builtin", "uploaded"]},
                "created_at": {"type": "integer", "description": "Unix seconds"}
            }},
            "LookupResult": {"type": "object", "properties": {
                "word": {"type": "string"},
                "found": {"type": "boolean"},
                "matched_form": {"type": "string"},
                "vector": {"type": "array", "items": {"type": "number"}}
            }},
            "Spec": {
                "description": "Builtin specification name, or an object with t1, t2 and optionally a1, a2 term lists",
                "oneOf": [
                    {"type": "string"},
                    {"type": "object", "required": ["t1", "t2"], "properties": {
                        "name": {"type": "string"},
                        "t1": {"type": "array", "items": {"type": "string"}},
                        "t2": {"type": "array", "items": {"type": "string"}},
                        "a1": {"type": "array", "items": {"type": "string"}},
                        "a2": {"type": "array", "items": {"type": "string"}}
                    }}
                ]
            },
            "EvaluateRequest": {"type": "object", "required": ["space_id", "spec"], "properties": {
                "space_id": {"type": "string"},
                "spec": schema_ref("Spec"),
                "metrics": {"type": "array", "items": {"type": "string", "enum": ["weat", "ect", "bat", "ibt", "ibt_cluster", "ibt_svm", "sq", "all"]}},
                "options": {"type": "object", "properties": {
                    "seed": {"type": "integer", "default": 42},
                    "n_permutations": {"type": "integer", "default": 10000}
                }},
                "async": {"type": "boolean", "default": false}
            }},
            "EvaluationReport": {"type": "object", "properties": {
                "space": {"type": "string"},
                "spec": {"type": "string"},
                "explicit": {"type": "boolean"},
                "metrics": {"type": "array", "items": {"type": "string"}},
                "weat": {"type": "object"},
                "ect": {"type": "number"},
                "bat": {"type": "number"},
                "ibt": {"type": "object"},
                "sq": {"type": "object"},
                "coverage": {"type": "object"}
            }},
            "DebiasRequest": {"type": "object", "required": ["space_id", "spec", "method"], "properties": {
                "space_id": {"type": "string"},
                "spec": schema_ref("Spec"),
                "method": {"type": "string", "enum": ["gbdd", "bam", "gbdd-bam", "bam-gbdd"]},
                "return": {"type": "string", "enum": ["handle", "download"], "default": "handle"}
            }},
            "DebiasResponse": {"type": "object", "properties": {
                "space": schema_ref("SpaceHandle"),
                "metadata": {"type": "object"}
            }},
            "VisualizeRequest": {"type": "object", "required": ["space_id", "spec"], "properties": {
                "space_id": {"type": "string"},
                "debiased_space_id": {"type": "string"},
                "spec": schema_ref("Spec")
            }},
            "ProjectionView": {"type": "object", "properties": {
                "spec": {"type": "string"},
                "projections": {"type": "array", "items": {"type": "object"}},
                "missing": {"type": "array", "items": {"type": "string"}}
            }},
            "JobRecord": {"type": "object", "properties": {
                "id": {"type": "string"},
                "kind": {"type": "string", "enum": ["evaluate", "debias"]},
                "state": {"type": "string", "enum": ["pending", "running", "done", "failed"]},
                "result_ref": {"type": "string"},
                "error": {"type": "string"}
            }}
        }}
    })
}
