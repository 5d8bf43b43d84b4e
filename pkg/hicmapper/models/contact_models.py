"""
Pydantic models for fragment pairs, contact maps and sample-by-sample matrices.
"""

from typing import List

import numpy as np
from pydantic import BaseModel, Field, computed_field, field_validator, model_validator
from scipy import sparse

SYMMETRY_TOLERANCE = 1e-9


class FragmentPairRecord(BaseModel):
    """One ligated fragment pair on a single chromosome."""
    sample_id: str
    pos_a: int = Field(ge=0)
    pos_b: int = Field(ge=0)


class PairFormat(BaseModel):
    """Column layout of a fragment-pair text file."""
    delimiter: str = "\t"
    comment_prefix: str = "#"
    sample_column: int = Field(0, ge=0)
    pos_a_column: int = Field(1, ge=0)
    pos_b_column: int = Field(2, ge=0)

    @computed_field
    @property
    def min_columns(self) -> int:
        """Number of fields a data line needs."""
        return max(self.sample_column, self.pos_a_column, self.pos_b_column) + 1


class ContactMap(BaseModel):
    """Symmetric non-negative contact counts over genomic bins."""
    n_bins: int = Field(gt=0)
    bin_size: int = Field(gt=0)
    counts: sparse.csr_matrix

    class Config:
        arbitrary_types_allowed = True

    @field_validator("counts", mode="before")
    @classmethod
    def _as_csr(cls, value):
        if sparse.issparse(value):
            matrix = sparse.csr_matrix(value, dtype=np.float64)
        else:
            matrix = sparse.csr_matrix(np.asarray(value, dtype=np.float64))
        matrix.sum_duplicates()
        matrix.eliminate_zeros()
        return matrix

    @model_validator(mode="after")
    def _check_matrix(self):
        if self.counts.shape != (self.n_bins, self.n_bins):
            raise ValueError(f"counts shape {self.counts.shape} does not match n_bins={self.n_bins}")
        if self.counts.nnz and self.counts.data.min() < 0:
            raise ValueError("contact counts must be non-negative")
        asymmetry = abs(self.counts - self.counts.T)
        if asymmetry.nnz and asymmetry.max() > SYMMETRY_TOLERANCE:
            raise ValueError("contact map is not symmetric")
        return self

    def dense(self) -> np.ndarray:
        """Dense copy of the counts."""
        return self.counts.toarray()

    @computed_field
    @property
    def total_contacts(self) -> float:
        """Upper-triangle-plus-diagonal mass (one count per binned record)."""
        return float(sparse.triu(self.counts, k=0).sum())


class Stratum(BaseModel):
    """Entries separated by exactly k bins in two aligned contact maps."""
    k: int = Field(ge=1)
    entries_x: np.ndarray
    entries_y: np.ndarray

    class Config:
        arbitrary_types_allowed = True

    @field_validator("entries_x", "entries_y", mode="before")
    @classmethod
    def _as_vector(cls, value):
        return np.asarray(value, dtype=np.float64).ravel()

    @model_validator(mode="after")
    def _check_alignment(self):
        if self.entries_x.shape != self.entries_y.shape:
            raise ValueError("stratum entries are not aligned")
        return self

    @computed_field
    @property
    def card(self) -> int:
        """Number of index pairs in the stratum."""
        return int(self.entries_x.size)


class _SampleMatrix(BaseModel):
    """Dense symmetric matrix indexed by sample ids."""
    sample_ids: List[str]
    values: np.ndarray

    class Config:
        arbitrary_types_allowed = True

    @field_validator("values", mode="before")
    @classmethod
    def _as_array(cls, value):
        return np.asarray(value, dtype=np.float64)

    @model_validator(mode="after")
    def _check_square(self):
        n = len(self.sample_ids)
        if n == 0:
            raise ValueError("at least one sample is required")
        if self.values.shape != (n, n):
            raise ValueError(f"values shape {self.values.shape} does not match {n} sample ids")
        if not np.allclose(self.values, self.values.T, atol=SYMMETRY_TOLERANCE, rtol=0.0):
            raise ValueError("matrix is not symmetric")
        return self

    @computed_field
    @property
    def n_samples(self) -> int:
        """Number of samples."""
        return len(self.sample_ids)


class SimilarityMatrix(_SampleMatrix):
    """Pairwise SCC values; the diagonal is exactly 1."""

    @model_validator(mode="after")
    def _check_diagonal(self):
        if not np.all(np.diag(self.values) == 1.0):
            raise ValueError("similarity diagonal must be exactly 1")
        return self


class DistanceMatrix(_SampleMatrix):
    """Pairwise d_SCC (or any other) distances; zero diagonal, non-negative."""

    @model_validator(mode="after")
    def _check_distances(self):
        if np.any(np.diag(self.values) != 0.0):
            raise ValueError("distance diagonal must be zero")
        if np.any(self.values < 0):
            raise ValueError("distances must be non-negative")
        return self
