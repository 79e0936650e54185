#pragma once

#include <string>
#include <vector>

#include "codeclean/dataset.hpp"

// Small corpus-language programs used across the suites: known-correct
// solutions, their single-edit mutants, and example original/modular pairs
// with hand-counted function inventories.

namespace fixtures {

struct OracleFixture {
    std::string name;
    std::string correct;
    std::string mutant;  // differs from `correct` by one edit and fails at least one test
    codeclean::TestSuite tests;
};

inline const std::vector<OracleFixture>& oracle_fixtures() {
    static const std::vector<OracleFixture> fx = {
        {"add",
         "a, b = map(int, input().split())\nprint(a + b)\n",
         "a, b = map(int, input().split())\nprint(a - b)\n",
         {{"3 4\n", "1 2\n"}, {"7\n", "3\n"}}},
        {"max",
         "a, b = map(int, input().split())\nprint(max(a, b))\n",
         "a, b = map(int, input().split())\nprint(min(a, b))\n",
         {{"3 9\n", "5 2\n"}, {"9\n", "5\n"}}},
        {"sum_list",
         "arr = list(map(int, input().split()))\nprint(sum(arr))\n",
         "arr = list(map(int, input().split()))\nprint(sum(arr) + 1)\n",
         {{"1 2 3\n", "10 20\n"}, {"6\n", "30\n"}}},
        {"reverse",
         "s = input()\nprint(s[::-1])\n",
         "s = input()\nprint(s[:-1])\n",
         {{"abc\n", "hello\n"}, {"cba\n", "olleh\n"}}},
        {"count_evens",
         "nums = list(map(int, input().split()))\nprint(len([x for x in nums if x % 2 == 0]))\n",
         "nums = list(map(int, input().split()))\nprint(len([x for x in nums if x % 2 == 1]))\n",
         {{"1 2 3 4\n", "2 4 6\n"}, {"2\n", "3\n"}}},
        {"factorial",
         "n = int(input())\nresult = 1\nfor i in range(1, n + 1):\n    result *= i\nprint(result)\n",
         "n = int(input())\nresult = 1\nfor i in range(1, n):\n    result *= i\nprint(result)\n",
         {{"5\n", "3\n"}, {"120\n", "6\n"}}},
        {"fibonacci",
         "n = int(input())\na, b = 1, 1\nfor _ in range(n - 1):\n    a, b = b, a + b\nprint(a)\n",
         "n = int(input())\na, b = 1, 1\nfor _ in range(n - 2):\n    a, b = b, a + b\nprint(a)\n",
         {{"7\n", "2\n"}, {"13\n", "1\n"}}},
        {"gcd",
         "a, b = map(int, input().split())\nwhile b:\n    a, b = b, a % b\nprint(a)\n",
         "a, b = map(int, input().split())\nwhile b:\n    a, b = b, a // b\nprint(a)\n",
         {{"12 18\n", "7 21\n"}, {"6\n", "7\n"}}},
        {"palindrome_check",
         "s = input()\nprint('YES' if s == s[::-1] else 'NO')\n",
         "s = input()\nprint('YES' if s != s[::-1] else 'NO')\n",
         {{"abba\n", "abc\n"}, {"YES\n", "NO\n"}}},
        {"sort_ints",
         "arr = list(map(int, input().split()))\nprint(' '.join(map(str, sorted(arr))))\n",
         "arr = list(map(int, input().split()))\nprint(' '.join(map(str, sorted(arr, reverse=True))))\n",
         {{"3 1 2\n", "5 4\n"}, {"1 2 3\n", "4 5\n"}}},
        {"min_index",
         "arr = list(map(int, input().split()))\nprint(arr.index(min(arr)))\n",
         "arr = list(map(int, input().split()))\nprint(arr.index(max(arr)))\n",
         {{"4 2 7\n", "9 1\n"}, {"1\n", "1\n"}}},
        {"vowel_count",
         "s = input()\nprint(sum(1 for c in s if c in 'aeiou'))\n",
         "s = input()\nprint(sum(1 for c in s if c in 'aeio'))\n",
         {{"banana\n", "queue\n"}, {"3\n", "4\n"}}},
        {"power",
         "a, b = map(int, input().split())\nprint(a ** b)\n",
         "a, b = map(int, input().split())\nprint(a * b)\n",
         {{"2 10\n", "3 3\n"}, {"1024\n", "27\n"}}},
        {"abs_diff",
         "a, b = map(int, input().split())\nprint(abs(a - b))\n",
         "a, b = map(int, input().split())\nprint(a - b)\n",
         {{"3 10\n", "10 3\n"}, {"7\n", "7\n"}}},
        {"repeat",
         "s, n = input().split()\nprint(s * int(n))\n",
         "s, n = input().split()\nprint(s * (int(n) - 1))\n",
         {{"ab 3\n", "x 5\n"}, {"ababab\n", "xxxxx\n"}}},
        {"half_product",
         "b, h = map(int, input().split())\nprint((b * h) // 2)\n",
         "b, h = map(int, input().split())\nprint((b * h) // 3)\n",
         {{"4 6\n", "5 2\n"}, {"12\n", "5\n"}}},
        {"last_digit",
         "n = int(input())\nprint(n % 10)\n",
         "n = int(input())\nprint(n % 9)\n",
         {{"1234\n", "905\n"}, {"4\n", "5\n"}}},
        {"join_comma",
         "parts = input().split()\nprint(','.join(parts))\n",
         "parts = input().split()\nprint(';'.join(parts))\n",
         {{"a b c\n", "x y\n"}, {"a,b,c\n", "x,y\n"}}},
        {"upper",
         "s = input()\nprint(s.upper())\n",
         "s = input()\nprint(s.lower())\n",
         {{"Hello\n", "world\n"}, {"HELLO\n", "WORLD\n"}}},
        {"second_largest",
         "arr = list(map(int, input().split()))\nprint(sorted(set(arr))[-2])\n",
         "arr = list(map(int, input().split()))\nprint(sorted(set(arr))[-1])\n",
         {{"1 5 3 5\n", "2 9 4\n"}, {"3\n", "4\n"}}},
    };
    return fx;
}

// Any-order output task: the dataset's expected output lists the pair in
// ascending order, while the reference solution (and programs derived from
// it) print the pair in descending order.
inline codeclean::Problem multi_answer_problem() {
    codeclean::Problem p;
    p.id = "pair-any-order";
    p.platform = "codeforces";
    p.statement = "Read two integers and print both of them in any order.";
    p.tests.inputs = {"1 2\n", "8 3\n"};
    p.tests.expected_outputs = {"1 2\n", "3 8\n"};
    p.multi_answer = true;
    p.reference_solutions = {"a, b = input().split()\nprint(b, a)\n"};
    return p;
}

struct ExamplePair {
    std::string name;
    std::string original;
    std::string modular;
    int original_function_count;   // hand count
    int modular_function_count;    // hand count
    std::vector<std::string> modular_function_names;
};

inline const std::vector<ExamplePair>& example_pairs() {
    static const std::vector<ExamplePair> pairs = {
        {"closest_palindrome",
         R"py(import bisect
rev=[]
for i in range(1,10002):
    if str(i)==str(i)[::-1]:rev.append(i)
n=int(input())
ind= bisect.bisect_left(rev,n)
if abs(n-rev[ind-1])<=abs(n-rev[ind]):
    print(rev[ind-1])
else:
    print(rev[ind])
)py",
         R"py(import bisect

def generate_palindromes():
    palindromes = []
    for num in range(1, 10002):
        if str(num) == str(num)[::-1]:
            palindromes.append(num)
    return palindromes

def find_closest_palindrome(palindromes, n):
    index = bisect.bisect_left(palindromes, n)
    if abs(n - palindromes[index - 1]) <= abs(n - palindromes[index]):
        return palindromes[index - 1]
    else:
        return palindromes[index]

def main():
    palindromes = generate_palindromes()
    n = int(input())
    closest_palindrome = find_closest_palindrome(palindromes, n)
    print(closest_palindrome)

if __name__ == '__main__':
    main()
)py",
         0,
         3,
         {"generate_palindromes", "find_closest_palindrome", "main"}},
        {"book_locations",
         R"py(import heapq

def dfs(graph, start):
    n = len(graph)
    dist = [-0 for i in range(n + 1)]
    visited = [False for i in range(n + 1)]
    visited[start] = True
    stack = []
    dist[start] = 0
    heapq.heappush(stack, start)
    while stack:
        u = heapq.heappop(stack)
        for v in graph[u]:
            if not visited[v]:
                visited[v] = True
                dist[v] = dist[u] + 1
                heapq.heappush(stack, v)
    return dist

def solution():
    n, m, d = map(int, input().strip().split())
    p = list(map(int, input().strip().split()))
    graph = [[] for i in range(n + 1)]
    for i in range(n - 1):
        a, b = map(int, input().strip().split())
        graph[a].append(b)
        graph[b].append(a)
    dist = dfs(graph, 1)

    max_distance = -1
    u = -1
    v = -1
    for i in p:
        if dist[i] > max_distance:
            max_distance = dist[i]
            u = i

    distu = dfs(graph, u)

    max_distance = -1
    for i in p:
        if distu[i] > max_distance:
            max_distance = distu[i]
            v = i

    distv = dfs(graph, v)

    affected = 0
    for i in range(1, n + 1):
        if 0 <= distu[i] <= d and 0 <= distv[i] <= d:
            affected += 1

    print(affected)

solution()
)py",
         R"py(import heapq

def calculate_distances(graph, start):
    n = len(graph)
    distances = [-0 for i in range(n + 1)]
    visited = [False for i in range(n + 1)]
    visited[start] = True
    stack = []
    distances[start] = 0
    heapq.heappush(stack, start)
    while stack:
        current_node = heapq.heappop(stack)
        for neighbor in graph[current_node]:
            if not visited[neighbor]:
                visited[neighbor] = True
                distances[neighbor] = distances[current_node] + 1
                heapq.heappush(stack, neighbor)
    return distances

def find_possible_book_locations():
    n, m, d = map(int, input().strip().split())
    affected_settlements = list(map(int, input().strip().split()))
    graph = [[] for i in range(n + 1)]
    for i in range(n - 1):
        a, b = map(int, input().strip().split())
        graph[a].append(b)
        graph[b].append(a)
    return calculate_possible_locations(n, m, d, affected_settlements, graph)

def calculate_possible_locations(n, m, d, affected_settlements, graph):
    distances = calculate_distances(graph, 1)
    max_distance, u = find_max_distance(distances, affected_settlements)
    distances_u = calculate_distances(graph, u)
    max_distance, v = find_max_distance(distances_u, affected_settlements)
    distances_v = calculate_distances(graph, v)
    return count_possible_locations(n, d, distances_u, distances_v)

def find_max_distance(distances, affected_settlements):
    max_distance = -1
    u = -1
    for settlement in affected_settlements:
        if distances[settlement] > max_distance:
            max_distance = distances[settlement]
            u = settlement
    return max_distance, u

def count_possible_locations(n, d, distances_u, distances_v):
    possible_locations = 0
    for i in range(1, n + 1):
        if 0 <= distances_u[i] <= d and 0 <= distances_v[i] <= d:
            possible_locations += 1
    return possible_locations

def main():
    possible_locations = find_possible_book_locations()
    print(possible_locations)

if __name__ == '__main__':
    main()
)py",
         2,
         6,
         {"calculate_distances", "find_possible_book_locations", "calculate_possible_locations",
          "find_max_distance", "count_possible_locations", "main"}},
    };
    return pairs;
}

// A small native-schema dataset: five problems on five platforms, each with
// one correct reference solution; used by ingest/pipeline tests.
inline codeclean::Dataset five_problem_dataset() {
    using namespace codeclean;
    Dataset ds;
    const auto& fx = oracle_fixtures();
    const char* platforms[5] = {"codeforces", "codechef", "atcoder", "leetcode", "kattis"};
    for (int i = 0; i < 5; ++i) {
        const auto& f = fx[i];
        Problem p;
        p.id = "p" + std::to_string(i + 1);
        p.platform = platforms[i];
        p.statement = "Solve task '" + f.name + "' reading stdin and writing stdout.";
        p.difficulty = Difficulty::introductory;
        p.tests = f.tests;
        p.reference_solutions = {f.correct};
        ds.problems.push_back(std::move(p));

        Solution s;
        s.problem_id = "p" + std::to_string(i + 1);
        s.solution_id = "s" + std::to_string(i + 1);
        s.source = f.correct;
        ds.solutions.push_back(std::move(s));
    }
    return ds;
}

}  // namespace fixtures
