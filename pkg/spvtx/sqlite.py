import sqlite3 as sql
import numpy as np
import os
import json
from warnings import warn
from ._constants import CHECKPOINT_VERSION
from .exceptions import ValidationError

__all__ = ['save_checkpoint', 'load_checkpoint']

HEADER_TEMPLATE = "CREATE TABLE header (version INTEGER, config TEXT)"
PARAMS_TEMPLATE = "CREATE TABLE params (name TEXT PRIMARY KEY, shape TEXT, dtype TEXT, value BLOB)"
INSERT_TEMPLATE = "INSERT INTO {} VALUES ({})"


def customize_insert_template(n_columns, tablename):
    """
    Bind the INSERT INTO statement to a table name and a number of columns
    """
    return INSERT_TEMPLATE.format(tablename, ' , '.join(['?'] * n_columns))


def serialize(value):
    """
    Encode an array as little-endian float64 bytes, with its shape as JSON.
    """
    value = np.asarray(value, dtype='<f8')
    return json.dumps(list(value.shape)), '<f8', value.tobytes()


def deserialize(shape, dtype, blob):
    shape = tuple(json.loads(shape))
    return np.frombuffer(blob, dtype=np.dtype(dtype)).reshape(shape).astype(np.float64)


def save_checkpoint(params, config, filename, overwrite=False):
    """
    Store model parameters and the configuration that built them in a
    SQLite file.

    Arguments
    ---------
    params      :   dict
                    parameter name -> np.ndarray
    config      :   dict
                    JSON-serializable model configuration
    filename    :   str
                    path of the database
    overwrite   :   bool
                    replace an existing file instead of refusing
    """
    if os.path.isfile(filename):
        if not overwrite:
            raise ValidationError('Will not overwrite existing checkpoint {}'.format(filename))
        os.remove(filename)
    cxn = sql.connect(filename)
    try:
        cursor = cxn.cursor()
        cursor.execute(HEADER_TEMPLATE)
        cursor.execute(customize_insert_template(2, 'header'),
                       (CHECKPOINT_VERSION, json.dumps(config, sort_keys=True)))
        cursor.execute(PARAMS_TEMPLATE)
        insert = customize_insert_template(4, 'params')
        for name in sorted(params):
            cursor.execute(insert, (name,) + serialize(params[name]))
        cxn.commit()
    finally:
        cxn.close()


def load_checkpoint(filename):
    """
    Read a checkpoint written by save_checkpoint.

    Returns
    -------
    (params, config): dict of arrays and the stored configuration
    """
    if not os.path.isfile(filename):
        raise ValidationError('no checkpoint at {}'.format(filename))
    cxn = sql.connect(filename)
    try:
        version, config = cxn.execute('SELECT version, config FROM header').fetchone()
        rows = cxn.execute('SELECT name, shape, dtype, value FROM params').fetchall()
    except sql.DatabaseError as e:
        raise ValidationError('{} is not a checkpoint: {}'.format(filename, e))
    finally:
        cxn.close()
    if version != CHECKPOINT_VERSION:
        warn('checkpoint {} has format version {}, expected {}'
             .format(filename, version, CHECKPOINT_VERSION), stacklevel=2)
    params = {name: deserialize(shape, dtype, blob) for name, shape, dtype, blob in rows}
    return params, json.loads(config)
