"""Structured embedding algebra and retrieval/localization metrics.

The audio side of a trained model yields a semantic embedding, a spatial
embedding, and their learnable-weighted join. Editing swaps the spatial
part for a rescaled direction-text embedding. Retrieval metrics rank by
cosine similarity with stable index tie-breaking.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimMismatchError,
    LengthMismatchError,
    NonSquareError,
    ZeroDirectionEmbeddingError,
    ZeroRowError,
    ZeroVectorError,
)
from .geometry import DIRECTION_NAMES, DirectionClass

_TINY = 1e-12


@dataclass
class EmbeddingSet:
    """Embeddings for one clip or a batch (rows): audio triple plus text sides."""

    semantic: np.ndarray
    spatial: np.ndarray
    joint: np.ndarray
    text: np.ndarray | None = None
    spatial_text: np.ndarray | None = None
    direction_text: np.ndarray | None = None


@dataclass
class RetrievalReport:
    """Recall fractions keyed by k for both directions, plus localization error."""

    text_to_audio: dict = field(default_factory=dict)
    audio_to_text: dict = field(default_factory=dict)
    mean_localization_error: float | None = None

    def to_json_dict(self) -> dict:
        return {
            "text_to_audio": {f"r@{k}": v for k, v in sorted(self.text_to_audio.items())},
            "audio_to_text": {f"r@{k}": v for k, v in sorted(self.audio_to_text.items())},
            "mean_localization_error_deg": self.mean_localization_error,
        }


def _as_2d(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise DimMismatchError(f"{name} must be a vector or matrix, got shape {arr.shape}")
    return arr


def join_embeddings(semantic, spatial, weights) -> np.ndarray:
    """Weighted join: semantic + weights * spatial (elementwise)."""
    semantic = np.asarray(semantic, dtype=np.float64)
    spatial = np.asarray(spatial, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if semantic.shape != spatial.shape or weights.shape[-1] != semantic.shape[-1]:
        raise DimMismatchError(
            f"shapes disagree: semantic {semantic.shape}, spatial {spatial.shape}, "
            f"weights {weights.shape}")
    return semantic + weights * spatial


def edit_spatial(semantic, spatial, weights, direction_text) -> np.ndarray:
    """Join with the spatial part replaced by a rescaled direction embedding.

    The direction-text embedding is normalized and scaled to the spatial
    embedding's L2 norm (per row for batched input), then joined as usual.
    """
    single = np.asarray(semantic).ndim == 1
    semantic = _as_2d(semantic, "semantic")
    spatial = _as_2d(spatial, "spatial")
    direction_text = _as_2d(direction_text, "direction_text")
    if direction_text.shape[0] == 1 and semantic.shape[0] > 1:
        direction_text = np.broadcast_to(direction_text, semantic.shape)
    dir_norm = np.linalg.norm(direction_text, axis=-1, keepdims=True)
    if np.any(dir_norm < _TINY):
        raise ZeroDirectionEmbeddingError("direction-text embedding has zero norm")
    spa_norm = np.linalg.norm(spatial, axis=-1, keepdims=True)
    substituted = spa_norm * direction_text / dir_norm
    out = join_embeddings(semantic, substituted, weights)
    return out[0] if single else out


def similarity_matrix(a, b) -> np.ndarray:
    """Pairwise cosine similarities: rows of ``a`` against rows of ``b``."""
    a = _as_2d(a, "a")
    b = _as_2d(b, "b")
    if a.shape[1] != b.shape[1]:
        raise DimMismatchError(f"dims disagree: {a.shape[1]} vs {b.shape[1]}")
    na = np.linalg.norm(a, axis=1, keepdims=True)
    nb = np.linalg.norm(b, axis=1, keepdims=True)
    if np.any(na < _TINY) or np.any(nb < _TINY):
        raise ZeroRowError("cosine similarity needs nonzero rows")
    return (a / na) @ (b / nb).T


def recall_at_k(sim, ks=(1, 5, 10)) -> dict:
    """Fraction of queries whose diagonal match ranks in the top k.

    Row i is a query; entry (i, i) is its ground-truth match. Ties are
    broken by index order, so an earlier column beats an equal later one.
    """
    sim = np.asarray(sim, dtype=np.float64)
    if sim.ndim != 2 or sim.shape[0] != sim.shape[1]:
        raise NonSquareError(f"similarity matrix must be square, got {sim.shape}")
    n = sim.shape[0]
    diag = np.diag(sim)[:, None]
    ahead = (sim > diag).sum(axis=1)
    earlier_ties = ((sim == diag) & (np.arange(n)[None, :] < np.arange(n)[:, None])).sum(axis=1)
    rank = ahead + earlier_ties  # 0-based rank of the diagonal entry
    return {int(k): float(np.mean(rank < k)) for k in ks}


def zero_shot_direction(audio_emb, caption_embs) -> DirectionClass:
    """Nearest directional caption by cosine; ties go to the lowest class index."""
    caption_embs = _as_2d(caption_embs, "caption_embs")
    if caption_embs.shape[0] != len(DIRECTION_NAMES):
        raise DimMismatchError(
            f"need {len(DIRECTION_NAMES)} caption embeddings, got {caption_embs.shape[0]}")
    sims = similarity_matrix(np.asarray(audio_emb, dtype=np.float64)[None, :], caption_embs)
    return DirectionClass(int(np.argmax(sims[0])))


def localization_error(pred, target) -> float:
    """Mean angular distance in degrees between paired direction vectors."""
    pred = _as_2d(pred, "pred")
    target = _as_2d(target, "target")
    if pred.shape[0] != target.shape[0]:
        raise LengthMismatchError(f"{pred.shape[0]} predictions vs {target.shape[0]} targets")
    np_pred = np.linalg.norm(pred, axis=1)
    np_tgt = np.linalg.norm(target, axis=1)
    if np.any(np_pred < _TINY) or np.any(np_tgt < _TINY):
        raise ZeroVectorError("localization error needs nonzero vectors")
    cos = np.clip(np.sum(pred * target, axis=1) / (np_pred * np_tgt), -1.0, 1.0)
    return float(np.degrees(np.arccos(cos)).mean())


def retrieval_report(audio_embs, text_embs, pred_doa=None, target_doa=None,
                     ks=(1, 5, 10)) -> RetrievalReport:
    """Both-direction recall over matched (audio, text) rows."""
    t2a = recall_at_k(similarity_matrix(text_embs, audio_embs), ks)
    a2t = recall_at_k(similarity_matrix(audio_embs, text_embs), ks)
    err = None
    if pred_doa is not None and target_doa is not None:
        err = localization_error(pred_doa, target_doa)
    return RetrievalReport(text_to_audio=t2a, audio_to_text=a2t,
                           mean_localization_error=err)


def format_report_table(reports: dict, ks=(1, 5, 10)) -> str:
    """Aligned table: one row per named report, recall columns both ways."""
    header_1 = f"{'':20s}  {'Text-to-Audio':>22s}  {'Audio-to-Text':>22s}  {'Local.':>7s}"
    ktags = "  ".join(f"R@{k}".rjust(6) for k in ks)
    header_2 = f"{'':20s}  {ktags}  {ktags}  {'Error':>7s}"
    lines = [header_1, header_2]
    for name, report in reports.items():
        t2a = "  ".join(f"{100 * report.text_to_audio[k]:5.1f}%" for k in ks)
        a2t = "  ".join(f"{100 * report.audio_to_text[k]:5.1f}%" for k in ks)
        err = ("   -   " if report.mean_localization_error is None
               else f"{report.mean_localization_error:6.1f}°")
        lines.append(f"{name:20s}  {t2a}  {a2t}  {err}")
    return "\n".join(lines)
