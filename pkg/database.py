"""
Database module for the approximate-group toolkit
Archives CLI runs in SQLite so results can be compared across sessions
"""

import logging
import os
import sqlite3
from datetime import datetime
from typing import Optional, Sequence

import pandas as pd

import config

logger = logging.getLogger(__name__)


def get_db_connection(db_path: Optional[str] = None):
    """Create a database connection"""
    conn = sqlite3.connect(db_path or config.ARCHIVE_DB)
    conn.row_factory = sqlite3.Row
    return conn


def init_db(db_path: Optional[str] = None):
    """Initialize the database with required tables"""
    conn = get_db_connection(db_path)
    cursor = conn.cursor()

    cursor.execute('''
    CREATE TABLE IF NOT EXISTS runs (
        id INTEGER PRIMARY KEY AUTOINCREMENT,
        command TEXT NOT NULL,
        argv TEXT,
        seed INTEGER,
        exit_code INTEGER NOT NULL,
        output TEXT,
        created_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP
    )
    ''')

    # last_run_time and friends
    cursor.execute('''
    CREATE TABLE IF NOT EXISTS metadata (
        key TEXT PRIMARY KEY,
        value TEXT,
        updated_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP
    )
    ''')

    conn.commit()
    conn.close()


def save_run(command: str, argv: Sequence[str], seed: int, exit_code: int, output: str, db_path: Optional[str] = None) -> int:
    """
    Store one CLI invocation

    Returns:
        id of the new row
    """
    init_db(db_path)
    conn = get_db_connection(db_path)
    cursor = conn.cursor()
    now = datetime.now().strftime('%Y-%m-%d %H:%M:%S')
    try:
        cursor.execute('''
        INSERT INTO runs (command, argv, seed, exit_code, output, created_at)
        VALUES (?, ?, ?, ?, ?, ?)
        ''', (command, " ".join(argv), seed, exit_code, output, now))
        run_id = cursor.lastrowid
        cursor.execute('INSERT OR REPLACE INTO metadata (key, value, updated_at) VALUES (?, ?, ?)', ('last_run_time', now, now))
        conn.commit()
    except sqlite3.Error as e:
        logger.error(f"Error storing run to archive: {e}")
        conn.rollback()
        raise
    finally:
        conn.close()
    logger.debug(f"Archived run {run_id} ({command}, exit {exit_code})")
    return run_id


def load_runs_df(db_path: Optional[str] = None) -> Optional[pd.DataFrame]:
    """Load archived runs into a pandas DataFrame"""
    path = db_path or config.ARCHIVE_DB
    if not os.path.exists(path):
        return None

    conn = get_db_connection(path)
    try:
        return pd.read_sql_query("SELECT * FROM runs ORDER BY id", conn)
    except Exception as e:
        logger.error(f"Error loading runs from archive: {e}")
        return None
    finally:
        conn.close()


def get_last_updated(db_path: Optional[str] = None) -> Optional[str]:
    """Timestamp of the most recent archived run"""
    path = db_path or config.ARCHIVE_DB
    if not os.path.exists(path):
        return None

    conn = get_db_connection(path)
    cursor = conn.cursor()
    try:
        cursor.execute("SELECT value FROM metadata WHERE key = 'last_run_time'")
        result = cursor.fetchone()
        if result and result[0]:
            return result[0]
        return None
    except sqlite3.Error:
        return None
    finally:
        conn.close()


def get_db_stats(db_path: Optional[str] = None):
    """Get statistics about the archive"""
    path = db_path or config.ARCHIVE_DB
    if not os.path.exists(path):
        return None

    runs = load_runs_df(path)
    stats = {
        'file_size': os.path.getsize(path),
        'modified_time': get_last_updated(path),
        'runs': 0 if runs is None else len(runs),
        'exists': True
    }
    return stats
