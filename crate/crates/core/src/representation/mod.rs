//! Token sequences to padded index matrices, and pretrained embedding tables.

mod embeddings;
mod vocab;

pub use embeddings::{
    build_embedding_matrix, load_embeddings, parse_embeddings, EmbeddingChoice, EmbeddingMatrix, EmbeddingTable,
    RANDOM_INIT_SCALE,
};
pub use vocab::{
    EncodedBatch, Vocabulary, DEFAULT_MAX_LEN, DEFAULT_MAX_SIZE, PAD_INDEX, PAD_TOKEN, UNK_INDEX, UNK_TOKEN,
};
