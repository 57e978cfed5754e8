"""Python bindings for the proxrec simulator and recommender."""

from ._proxrec import (
    ColdUserError,
    Error,
    LocalStore,
    ProtocolError,
    RatingRecord,
    SimilarityConfig,
    ValidationError,
    decode_payload,
    encode_payload,
    encoded_size,
    generate_trace,
    group_recommend,
    load_ratings,
    load_trace,
    main,
    predict,
    propinquity_similarity,
    rating_similarity,
    simulate,
    top_n,
)

__all__ = [
    "ColdUserError",
    "Error",
    "LocalStore",
    "ProtocolError",
    "RatingRecord",
    "SimilarityConfig",
    "ValidationError",
    "decode_payload",
    "encode_payload",
    "encoded_size",
    "generate_trace",
    "group_recommend",
    "load_ratings",
    "load_trace",
    "main",
    "predict",
    "propinquity_similarity",
    "rating_similarity",
    "simulate",
    "top_n",
]
