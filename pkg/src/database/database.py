"""
SQLite store for experiment results. Each saved experiment gets one
tExperiment record (kind, seed, spec echo, metadata) and its rows in tRow, so
sweeps run on different days can be compared and refitted together.
"""

import json
import os
import sqlite3
from contextlib import contextmanager
from typing import Iterable, Iterator
import numpy as np
import pandas as pd
from src.harness.result import ExperimentResult, rows_frame
from src.utils.helpers import RESULTS_DB_PATH, ROW_COLUMNS
from src.utils.logging import setup_logger

sqlite3.register_adapter(np.int64, int)
sqlite3.register_adapter(np.float64, float)
sqlite3.register_adapter(np.bool_, bool)

SCHEMA = (
    """
    CREATE TABLE IF NOT EXISTS tExperiment(
        experiment_id INTEGER PRIMARY KEY AUTOINCREMENT,
        kind TEXT NOT NULL,
        seed INTEGER,
        spec TEXT,
        meta TEXT,
        created TEXT DEFAULT CURRENT_TIMESTAMP
    );""",
    """
    CREATE TABLE IF NOT EXISTS tRow(
        experiment_id INTEGER NOT NULL,
        beta REAL NOT NULL,
        trial INTEGER NOT NULL,
        seed INTEGER NOT NULL,
        observable TEXT NOT NULL,
        value REAL,
        censored INTEGER NOT NULL,
        FOREIGN KEY (experiment_id) REFERENCES tExperiment(experiment_id)
    );""",
    "CREATE INDEX IF NOT EXISTS idx_row_experiment ON tRow(experiment_id, beta);",
)


class SQLiteStore:
    """
    Thin wrapper around one SQLite file: every statement runs inside a
    transaction that commits on success and rolls back on error, and failing
    statements are re-raised with the SQL attached
    """

    def __init__(self, path: str, create: bool = False):
        self.path = os.path.normpath(path)
        self.created = False
        if not os.path.exists(self.path):
            if not create:
                raise FileNotFoundError(f'Database "{self.path}" does not exist.')
            folder = os.path.dirname(self.path)
            if folder:
                os.makedirs(folder, exist_ok=True)
            self.created = True

    @contextmanager
    def transaction(self) -> Iterator[sqlite3.Cursor]:
        conn = sqlite3.connect(self.path)
        try:
            conn.execute("PRAGMA foreign_keys=ON;")
            cursor = conn.cursor()
            yield cursor
            conn.commit()
        except Exception:
            conn.rollback()
            raise
        finally:
            conn.close()

    def execute(self, sql: str, params: tuple | dict | None = None) -> int:
        """
        Runs one statement in its own transaction and returns lastrowid
        """
        try:
            with self.transaction() as cursor:
                cursor.execute(sql, params or ())
                return cursor.lastrowid
        except sqlite3.Error as e:
            raise type(e)(f"sql: {sql}\nparams: {params}") from e

    def query(self, sql: str, params: tuple | dict | None = None) -> pd.DataFrame:
        conn = sqlite3.connect(self.path)
        try:
            return pd.read_sql(sql, conn, params=params)
        except Exception as e:
            raise type(e)(f"sql: {sql}\nparams: {params}") from e
        finally:
            conn.close()


class ResultsDB(SQLiteStore):
    """
    Experiment results accumulated across runs; the schema is created on
    first use
    """

    def __init__(self, path: str = RESULTS_DB_PATH, create: bool = True):
        self.logger = setup_logger("ResultsDB", "database")
        super().__init__(path, create=create)
        if self.created:
            self.logger.info(f"Database not found at {self.path}. Creating schema")
        for statement in SCHEMA:
            self.execute(statement)

    def save_result(self, result: ExperimentResult) -> int:
        """
        Stores an experiment and its rows in one transaction
        ---
        Args:
            result (ExperimentResult): the experiment output
        Returns:
            int: the new experiment_id
        """
        spec = result.spec.to_dict() if result.spec is not None else {}
        try:
            with self.transaction() as cursor:
                cursor.execute(
                    "INSERT INTO tExperiment (kind, seed, spec, meta) VALUES (?, ?, ?, ?)",
                    (spec.get("kind", "unknown"), spec.get("seed"), json.dumps(spec), json.dumps(result.meta)),
                )
                experiment_id = cursor.lastrowid
                cursor.executemany(
                    f"INSERT INTO tRow VALUES (?, {', '.join('?' for _ in ROW_COLUMNS)})",
                    self._records(experiment_id, result.rows),
                )
        except sqlite3.Error:
            self.logger.error("Rolling back. Error occured while storing results")
            raise
        self.logger.info(f"Stored experiment {experiment_id} with {len(result.rows)} rows")
        return experiment_id

    @staticmethod
    def _records(experiment_id: int, rows: pd.DataFrame) -> Iterable[tuple]:
        for record in rows[ROW_COLUMNS].itertuples(index=False, name=None):
            yield (experiment_id, *record)

    def load_rows(self, experiment_id: int) -> pd.DataFrame:
        """
        Rows of one stored experiment, typed and ordered like a fresh result
        """
        rows = self.query(
            f"SELECT {', '.join(ROW_COLUMNS)} FROM tRow WHERE experiment_id = ?",
            params=(experiment_id,),
        )
        rows["censored"] = rows["censored"].astype(bool)
        return rows_frame(rows.to_dict(orient="records"))

    def load_result(self, experiment_id: int) -> ExperimentResult:
        meta = self.query(
            "SELECT meta FROM tExperiment WHERE experiment_id = ?", params=(experiment_id,)
        )
        if meta.empty:
            raise KeyError(f"no experiment with id {experiment_id}")
        return ExperimentResult(self.load_rows(experiment_id), meta=json.loads(meta["meta"].iloc[0]))

    def experiments(self) -> pd.DataFrame:
        return self.query(
            "SELECT experiment_id, kind, seed, created FROM tExperiment ORDER BY experiment_id"
        )
