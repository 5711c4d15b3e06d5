# cython: boundscheck=False, wraparound=False, language_level=3
"""Compiled matching kernel; mirrors _matchcore.enumerate_maps exactly."""

from libc.stdlib cimport calloc, free, malloc

KERNEL_NAME = "cython"


def enumerate_maps(p_types, p_links, h_types, h_links, iso):
    cdef int n = len(p_types)
    cdef int m = len(h_types)
    cdef int n_plinks = len(p_links)
    cdef int n_hlinks = len(h_links)

    if iso:
        if n != m or n_plinks != n_hlinks or sorted(p_types) != sorted(h_types):
            return []
    elif n > m:
        return []
    if n == 0:
        return [()]

    cdef int max_e = 0
    cdef int e, s, t
    for (e, s, t) in p_links:
        if e > max_e:
            max_e = e
    for (e, s, t) in h_links:
        if e > max_e:
            max_e = e
    cdef int n_e = max_e + 1

    # Host adjacency cube: host_set[(e*m + s)*m + t] == 1 iff the link exists.
    cdef unsigned char *host_set = <unsigned char *>calloc(n_e * m * m if m > 0 else 1, 1)
    cdef int *ptypes = <int *>malloc(n * sizeof(int))
    cdef int *htypes = <int *>malloc((m if m > 0 else 1) * sizeof(int))
    # Pattern links grouped by the position at which both endpoints are known.
    cdef int *pend_start = <int *>malloc((n + 1) * sizeof(int))
    cdef int *pend_e = <int *>malloc((n_plinks if n_plinks > 0 else 1) * sizeof(int))
    cdef int *pend_s = <int *>malloc((n_plinks if n_plinks > 0 else 1) * sizeof(int))
    cdef int *pend_t = <int *>malloc((n_plinks if n_plinks > 0 else 1) * sizeof(int))
    cdef int *assignment = <int *>malloc(n * sizeof(int))
    cdef unsigned char *used = <unsigned char *>calloc(m if m > 0 else 1, 1)
    if (host_set == NULL or ptypes == NULL or htypes == NULL or pend_start == NULL
            or pend_e == NULL or pend_s == NULL or pend_t == NULL
            or assignment == NULL or used == NULL):
        raise MemoryError()

    cdef int i, j, k, want, pos, ok
    results = []
    try:
        for i in range(n):
            ptypes[i] = p_types[i]
        for i in range(m):
            htypes[i] = h_types[i]
        for (e, s, t) in h_links:
            host_set[(e * m + s) * m + t] = 1

        # Counting sort of pattern links by completion position.
        for i in range(n + 1):
            pend_start[i] = 0
        for (e, s, t) in p_links:
            k = s if s > t else t
            pend_start[k + 1] += 1
        for i in range(n):
            pend_start[i + 1] += pend_start[i]
        fill = [pend_start[i] for i in range(n)]
        for (e, s, t) in p_links:
            k = s if s > t else t
            pos = fill[k]
            pend_e[pos] = e
            pend_s[pos] = s
            pend_t[pos] = t
            fill[k] = pos + 1

        k = 0
        assignment[0] = -1
        while k >= 0:
            if k == n:
                results.append(tuple([assignment[i] for i in range(n)]))
                k -= 1
                continue
            j = assignment[k]
            if j >= 0:
                used[j] = 0
            j += 1
            want = ptypes[k]
            while j < m:
                if not used[j] and htypes[j] == want:
                    assignment[k] = j
                    ok = 1
                    for i in range(pend_start[k], pend_start[k + 1]):
                        if not host_set[(pend_e[i] * m + assignment[pend_s[i]]) * m
                                        + assignment[pend_t[i]]]:
                            ok = 0
                            break
                    if ok:
                        break
                j += 1
            if j >= m:
                assignment[k] = -1
                k -= 1
            else:
                used[j] = 1
                k += 1
                if k < n:
                    assignment[k] = -1
    finally:
        free(host_set)
        free(ptypes)
        free(htypes)
        free(pend_start)
        free(pend_e)
        free(pend_s)
        free(pend_t)
        free(assignment)
        free(used)
    return results
