//! Small Prolog programs with queries, shared by the differential and
//! reproducibility checks.

pub struct Prog {
    pub name: &'static str,
    pub src: &'static str,
    pub queries: &'static [&'static str],
}

pub const CORPUS: &[Prog] = &[
    Prog {
        name: "append",
        src: "app([], L, L).\napp([H|T], L, [H|R]) :- app(T, L, R).\n",
        queries: &["app(X, Y, [a,b,c])", "app([1,2], [3], Z)", "app(X, [c], [a,b,c])"],
    },
    Prog {
        name: "nrev",
        src: "app([], L, L).\napp([H|T], L, [H|R]) :- app(T, L, R).\n\
              nrev([], []).\nnrev([H|T], R) :- nrev(T, RT), app(RT, [H], R).\n\
              range(N, N, [N]) :- !.\nrange(I, N, [I|T]) :- I < N, J is I + 1, range(J, N, T).\n",
        queries: &["nrev([a,b,c,d], R)", "range(1, 30, L), nrev(L, R)"],
    },
    Prog {
        name: "qsort",
        src: "qsort([], []).\nqsort([H|T], S) :- part(T, H, L, G), qsort(L, SL), qsort(G, SG), app(SL, [H|SG], S).\n\
              part([], _, [], []).\npart([X|T], P, [X|L], G) :- X =< P, !, part(T, P, L, G).\n\
              part([X|T], P, L, [X|G]) :- part(T, P, L, G).\n\
              app([], L, L).\napp([H|T], L, [H|R]) :- app(T, L, R).\n",
        queries: &["qsort([3,1,4,1,5,9,2,6,5,3,5], S)", "qsort([], S)"],
    },
    Prog {
        name: "member",
        src: "mem(X, [X|_]).\nmem(X, [_|T]) :- mem(X, T).\n",
        queries: &["mem(X, [a,b,c])", "mem(b, [a,b,c,b])", "mem(z, [a])", "mem(f(X), [g(1), f(2), f(3)])"],
    },
    Prog {
        name: "fib",
        src: "fib(0, 0).\nfib(1, 1).\nfib(N, F) :- N > 1, A is N - 1, B is N - 2, fib(A, FA), fib(B, FB), F is FA + FB.\n",
        queries: &["fib(15, F)", "fib(0, F)", "fib(1, F)"],
    },
    Prog {
        name: "hanoi",
        src: "hanoi(0, _, _, _, []) :- !.\n\
              hanoi(N, A, B, C, Ms) :- M is N - 1, hanoi(M, A, C, B, M1), hanoi(M, C, B, A, M2), app(M1, [A-B|M2], Ms).\n\
              app([], L, L).\napp([H|T], L, [H|R]) :- app(T, L, R).\n",
        queries: &["hanoi(3, a, b, c, Ms)", "hanoi(0, a, b, c, Ms)"],
    },
    Prog {
        name: "perm",
        src: "sel(X, [X|T], T).\nsel(X, [H|T], [H|R]) :- sel(X, T, R).\n\
              perm([], []).\nperm(L, [H|T]) :- sel(H, L, R), perm(R, T).\n",
        queries: &["perm([1,2,3], P)", "sel(X, [a,b,c], R)"],
    },
    Prog {
        name: "queens",
        src: "queens(N, Qs) :- numlist(1, N, Ns), perm(Ns, Qs), safe(Qs).\n\
              numlist(N, N, [N]) :- !.\nnumlist(I, N, [I|T]) :- J is I + 1, numlist(J, N, T).\n\
              sel(X, [X|T], T).\nsel(X, [H|T], [H|R]) :- sel(X, T, R).\n\
              perm([], []).\nperm(L, [H|T]) :- sel(H, L, R), perm(R, T).\n\
              safe([]).\nsafe([Q|Qs]) :- noatt(Q, Qs, 1), safe(Qs).\n\
              noatt(_, [], _).\nnoatt(Q, [Q1|Qs], D) :- Q =\\= Q1 + D, Q =\\= Q1 - D, D1 is D + 1, noatt(Q, Qs, D1).\n",
        queries: &["queens(5, Qs)", "queens(3, Qs)"],
    },
    Prog {
        name: "family",
        src: "parent(tom, bob).\nparent(tom, liz).\nparent(bob, ann).\nparent(bob, pat).\nparent(pat, jim).\n\
              anc(X, Y) :- parent(X, Y).\nanc(X, Y) :- parent(X, Z), anc(Z, Y).\n\
              sibling(X, Y) :- parent(P, X), parent(P, Y), X \\== Y.\n",
        queries: &["anc(tom, D)", "anc(A, jim)", "sibling(ann, S)", "sibling(X, Y)"],
    },
    Prog {
        name: "is_true",
        src: "is_true(true).\nis_true(X) :- X == t, !.\nis_true(yes) :- !.\nis_true(on).\n",
        queries: &["is_true(X)", "is_true(t)", "is_true(yes)", "is_true(no)"],
    },
    Prog {
        name: "ite",
        src: "max(X, Y, Z) :- ( X >= Y -> Z = X ; Z = Y ).\n\
              sign(X, S) :- ( X > 0 -> S = pos ; X < 0 -> S = neg ; S = zero ).\n\
              pick(X) :- ( mem(X, [1,2,3]), X > 1 -> true ; X = none ).\n\
              mem(X, [X|_]).\nmem(X, [_|T]) :- mem(X, T).\n",
        queries: &["max(3, 7, Z)", "max(9, 2, Z)", "sign(-4, S)", "sign(0, S)", "sign(5, S)", "pick(X)"],
    },
    Prog {
        name: "negation",
        src: "mem(X, [X|_]).\nmem(X, [_|T]) :- mem(X, T).\n\
              diff([], _, []).\ndiff([H|T], L, R) :- ( \\+ mem(H, L) -> R = [H|R1] ; R = R1 ), diff(T, L, R1).\n\
              odd(X) :- \\+ 0 =:= X mod 2.\n",
        queries: &["diff([1,2,3,4,5], [2,4], D)", "mem(X, [1,2,3,4,5]), odd(X)", "\\+ mem(q, [a])"],
    },
    Prog {
        name: "length",
        src: "len(L, N) :- len(L, 0, N).\nlen([], N, N).\nlen([_|T], A, N) :- A1 is A + 1, len(T, A1, N).\n",
        queries: &["len([a,b,c,d], N)", "len([], N)", "len([x], 1)"],
    },
    Prog {
        name: "ackermann",
        src: "ack(0, N, R) :- !, R is N + 1.\nack(M, 0, R) :- !, M1 is M - 1, ack(M1, 1, R).\n\
              ack(M, N, R) :- M1 is M - 1, N1 is N - 1, ack(M, N1, R1), ack(M1, R1, R).\n",
        queries: &["ack(2, 3, R)", "ack(0, 0, R)", "ack(1, 5, R)"],
    },
    Prog {
        name: "gcd",
        src: "gcd(X, 0, X) :- !.\ngcd(X, Y, G) :- Z is X mod Y, gcd(Y, Z, G).\n",
        queries: &["gcd(48, 18, G)", "gcd(17, 5, G)", "gcd(0, 9, G)", "X is -7 mod 3", "X is 7 mod -3"],
    },
    Prog {
        name: "path",
        src: "edge(a, b).\nedge(b, c).\nedge(c, d).\nedge(a, d).\nedge(d, e).\n\
              path(X, Y, [X,Y]) :- edge(X, Y).\npath(X, Y, [X|P]) :- edge(X, Z), path(Z, Y, P).\n",
        queries: &["path(a, e, P)", "path(b, X, _P)", "path(e, a, P)"],
    },
    Prog {
        name: "subsets",
        src: "subset([], []).\nsubset([H|T], [H|S]) :- subset(T, S).\nsubset([_|T], S) :- subset(T, S).\n",
        queries: &["subset([a,b,c], S)"],
    },
    Prog {
        name: "msort",
        src: "msort([], []) :- !.\nmsort([X], [X]) :- !.\n\
              msort(L, S) :- split(L, A, B), msort(A, SA), msort(B, SB), merge(SA, SB, S).\n\
              split([], [], []).\nsplit([X|T], [X|A], B) :- split(T, B, A).\n\
              merge([], L, L) :- !.\nmerge(L, [], L) :- !.\n\
              merge([X|A], [Y|B], [X|M]) :- X =< Y, !, merge(A, [Y|B], M).\n\
              merge(A, [Y|B], [Y|M]) :- merge(A, B, M).\n",
        queries: &["msort([5,3,8,1,9,2,7], S)", "msort([2,2,1], S)"],
    },
    Prog {
        name: "coloring",
        src: "color(red).\ncolor(green).\ncolor(blue).\n\
              map(A, B, C, D) :- color(A), color(B), A \\== B, color(C), A \\== C, B \\== C, color(D), C \\== D, B \\== D.\n",
        queries: &["map(A, B, C, D)", "map(red, green, C, D)"],
    },
    Prog {
        name: "peano",
        src: "add(z, Y, Y).\nadd(s(X), Y, s(Z)) :- add(X, Y, Z).\n\
              mul(z, _, z).\nmul(s(X), Y, Z) :- mul(X, Y, W), add(W, Y, Z).\n",
        queries: &["add(X, Y, s(s(z)))", "mul(s(s(z)), s(s(s(z))), Z)", "add(s(z), s(z), s(s(z)))"],
    },
    Prog {
        name: "last",
        src: "last([X], X) :- !.\nlast([_|T], X) :- last(T, X).\n\
              rev(L, R) :- rev(L, [], R).\nrev([], A, A).\nrev([H|T], A, R) :- rev(T, [H|A], R).\n",
        queries: &["last([1,2,3], X)", "rev([a,b,c], R)"],
    },
    Prog {
        name: "cut",
        src: "t(1).\nt(2).\nt(3).\n\
              a(X) :- t(X), X > 1, !.\na(0).\n\
              b(X, Y) :- t(X), !, t(Y).\nb(9, 9).\n\
              c(X) :- ( t(X), ! ; X = 7 ).\nc(8).\n\
              d(X) :- call((t(X), !)).\nd(5).\n\
              e(X) :- \\+ \\+ X = 1, var(X).\n",
        queries: &["a(X)", "b(X, Y)", "c(X)", "d(X)", "e(X)"],
    },
    Prog {
        name: "disjunction",
        src: "p(X) :- ( X = 1 ; X = 2 ; ( X = 3 ; X = 4 ) ).\n\
              q(X, Y) :- ( p(X), X < 3 ; X = 9 ), ( Y = a ; Y = b ).\n\
              r(X) :- ( X = 1, ! ; X = 2 ).\nr(3).\n",
        queries: &["p(X)", "q(X, Y)", "r(X)"],
    },
    Prog {
        name: "terms",
        src: "swap(f(X, Y), f(Y, X)).\nnested(g(h(A), [A|T], T)).\n\
              same(X, X).\nkind(X, var) :- var(X), !.\nkind(X, atom) :- atom(X), !.\nkind(X, int) :- integer(X), !.\nkind(_, other).\n",
        queries: &["swap(f(1, a), S)", "nested(N)", "same(f(X, b), f(a, Y))", "kind(foo, K)", "kind(3, K)", "kind(_, K)", "kind(f(x), K)", "X = \"\", Y = 'it''s', Z = 'A b'"],
    },
    Prog {
        name: "zebra_lite",
        src: "mem(X, [X|_]).\nmem(X, [_|T]) :- mem(X, T).\n\
              right_of(X, Y, [Y,X|_]).\nright_of(X, Y, [_|T]) :- right_of(X, Y, T).\n\
              next_to(X, Y, L) :- ( right_of(X, Y, L) ; right_of(Y, X, L) ).\n\
              houses(Hs) :- Hs = [h(_, norwegian, _), _, _],\n\
                  mem(h(red, english, _), Hs), mem(h(_, spanish, dog), Hs),\n\
                  next_to(h(_, norwegian, _), h(blue, _, _), Hs),\n\
                  mem(h(green, _, zebra), Hs), mem(h(_, _, fish), Hs).\n\
              owner(P, Hs) :- houses(Hs), mem(h(_, P, zebra), Hs).\n",
        queries: &["houses(Hs)", "owner(P, _Hs)"],
    },
];
